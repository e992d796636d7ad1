#!/usr/bin/env python3
"""
Structural validation of choice datasets.

Validation reports problems instead of raising, so a caller can print every
finding for a file at once.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Union

import numpy as np

from .models import AttributeKind, ChoiceDataset

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-10
MAX_LISTED = 5


class Severity(str, Enum):
    ERROR = "ERROR"
    WARNING = "WARNING"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    message: str

    def to_line(self) -> str:
        return f"{self.severity.value}\t{self.code}\t{self.message}"


@dataclass
class ValidationReport:
    """Findings of :func:`validate_dataset`; empty means clean."""
    findings: List[Finding] = field(default_factory=list)

    def add(self, severity: Severity, code: str, message: str) -> None:
        self.findings.append(Finding(severity, code, message))

    def __len__(self) -> int:
        return len(self.findings)

    def __bool__(self) -> bool:
        return bool(self.findings)

    @property
    def is_clean(self) -> bool:
        return not self.findings

    @property
    def has_errors(self) -> bool:
        return any(f.severity == Severity.ERROR for f in self.findings)

    @property
    def codes(self) -> List[str]:
        return [f.code for f in self.findings]

    def by_code(self, code: str) -> List[Finding]:
        return [f for f in self.findings if f.code == code]

    def to_text(self) -> str:
        return "".join(f.to_line() + "\n" for f in self.findings)

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_text(), encoding="utf-8")
        return path


def _ids(ds: ChoiceDataset, rows: np.ndarray) -> str:
    shown = ", ".join(f"'{ds.situation_ids[r]}'" for r in rows[:MAX_LISTED])
    more = f" and {len(rows) - MAX_LISTED} more" if len(rows) > MAX_LISTED else ""
    return shown + more


def differenced_design(ds: ChoiceDataset) -> np.ndarray:
    """
    Within-situation attribute differences against the first available slot.

    One row per additional available alternative; shape (M, K).
    """
    avail = ds.available
    ref = np.argmax(avail, axis=1)
    reference = ds.attributes[np.arange(len(ds)), ref]
    others = avail.copy()
    others[np.arange(len(ds)), ref] = False
    rows, slots = np.nonzero(others)
    return ds.attributes[rows, slots] - reference[rows]


def _check_choices(ds: ChoiceDataset, report: ValidationReport) -> None:
    n_avail = ds.n_available
    few = np.flatnonzero(n_avail < 2)
    if few.size:
        report.add(Severity.ERROR, "too-few-available",
                   f"{few.size} situation(s) offer fewer than 2 available alternatives: {_ids(ds, few)}")
    missing = np.flatnonzero(ds.chosen < 0)
    if missing.size:
        report.add(Severity.ERROR, "missing-choice",
                   f"{missing.size} situation(s) have no chosen alternative: {_ids(ds, missing)}")
    rows = np.flatnonzero(ds.chosen >= 0)
    unavailable = rows[~ds.available[rows, ds.chosen[rows]]]
    if unavailable.size:
        report.add(Severity.ERROR, "unavailable-chosen",
                   f"{unavailable.size} situation(s) chose an unavailable alternative: {_ids(ds, unavailable)}")


def _check_ranges(ds: ChoiceDataset, report: ValidationReport) -> None:
    schema = ds.schema
    for k, (name, kind) in enumerate(zip(schema.attribute_names, schema.attribute_kinds)):
        values = ds.attributes[:, :, k][ds.present]
        if not np.all(np.isfinite(values)):
            report.add(Severity.ERROR, "attribute-non-finite", f"attribute '{name}' has non-finite values")
            continue
        if kind == AttributeKind.BINARY:
            bad = ~np.isin(values, (0.0, 1.0))
            allowed = "{0, 1}"
        elif kind == AttributeKind.CATEGORICAL:
            bad = ~np.isin(values, schema.levels[name])
            allowed = f"levels {schema.levels[name]}"
        elif name in schema.bounds:
            lo, hi = schema.bounds[name]
            bad = (values < lo) | (values > hi)
            allowed = f"[{lo:g}, {hi:g}]"
        else:
            continue
        if bad.any():
            report.add(Severity.ERROR, "attribute-out-of-range",
                       f"attribute '{name}' has {int(bad.sum())} value(s) outside {allowed}, "
                       f"e.g. {values[bad][0]:g}")


def _check_identification(ds: ChoiceDataset, report: ValidationReport) -> None:
    names = ds.schema.attribute_names
    diffs = differenced_design(ds)
    if diffs.shape[0] == 0 or not np.all(np.isfinite(diffs)):
        return
    scale = np.max(np.abs(diffs)) if diffs.size else 0.0
    zero = np.all(np.abs(diffs) <= RANK_TOLERANCE * max(scale, 1.0), axis=0)
    for k in np.flatnonzero(zero):
        report.add(Severity.WARNING, "non-identified",
                   f"attribute '{names[k]}' does not vary within any situation; its coefficient is not identified")
    keep = np.flatnonzero(~zero)
    if keep.size < 2:
        return
    _, singular, vt = np.linalg.svd(diffs[:, keep], full_matrices=False)
    null = singular < RANK_TOLERANCE * singular[0]
    if null.any():
        involved = np.any(np.abs(vt[null]) > 1e-8, axis=0)
        members = [names[keep[i]] for i in np.flatnonzero(involved)]
        report.add(Severity.WARNING, "collinear-attributes",
                   f"within-situation differences of {members} are linearly dependent "
                   f"(rank {int((~null).sum())} of {keep.size})")


def validate_dataset(ds: ChoiceDataset) -> ValidationReport:
    """
    Check a dataset for problems that would break or bias estimation.

    Parameters:
    -----------
    ds : ChoiceDataset
        The dataset to check.

    Returns:
    --------
    ValidationReport
        One finding per problem; serialized as ``SEVERITY<tab>code<tab>message``.
    """
    report = ValidationReport()
    _check_choices(ds, report)
    _check_ranges(ds, report)
    _check_identification(ds, report)
    for finding in report.findings:
        log = logger.error if finding.severity == Severity.ERROR else logger.warning
        log(f"{finding.code}: {finding.message}")
    return report
