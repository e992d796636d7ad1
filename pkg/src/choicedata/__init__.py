"""Choice dataset model, file ingestion, validation and fold splitting."""

from .folds import fold_assignment, split_kfold
from .ingestion import load_csv, write_csv
from .models import AlternativeRecord, AttributeKind, AttributeSchema, ChoiceDataset, ChoiceSituation
from .validators import Finding, Severity, ValidationReport, validate_dataset

__all__ = [
    "AlternativeRecord",
    "AttributeKind",
    "AttributeSchema",
    "ChoiceDataset",
    "ChoiceSituation",
    "Finding",
    "Severity",
    "ValidationReport",
    "fold_assignment",
    "load_csv",
    "split_kfold",
    "validate_dataset",
    "write_csv",
]
