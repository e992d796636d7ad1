"""Out-of-sample validation."""

from .crossval import FoldResult, ValidationSummary, cross_validate
from .metrics import mape

__all__ = ["FoldResult", "ValidationSummary", "cross_validate", "mape"]
