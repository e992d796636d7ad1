#!/usr/bin/env python3
"""
Reading and writing long-format choice data files.

One row per alternative per situation, with the columns
``situation_id, respondent_id, alt_id, chosen, available``, then the schema's
attribute columns, then its covariate columns, then optionally ``product``
(the situation's segment label). Lines starting with ``#`` at the top of the
file are header comments and are skipped.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd

from src.core.errors import DataParseError, IntegrityError, SchemaError
from .models import RESERVED_COLUMNS, SEGMENT_COLUMN, AttributeSchema, ChoiceDataset

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _count_header_comments(path: Path) -> int:
    count = 0
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("#"):
                break
            count += 1
    return count


def _parse_numeric(frame: pd.DataFrame, column: str, first_row: int) -> np.ndarray:
    values = pd.to_numeric(frame[column].str.strip(), errors="coerce")
    bad = values.isna().to_numpy()
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raw = frame[column].iloc[pos]
        what = "missing value" if raw.strip() == "" else f"non-numeric value '{raw}'"
        raise DataParseError(
            f"{what} in column '{column}' at row {pos + first_row}",
            row=pos + first_row,
            column=column,
        )
    return values.to_numpy(dtype=float)


def _parse_flag(frame: pd.DataFrame, column: str, first_row: int) -> np.ndarray:
    values = _parse_numeric(frame, column, first_row)
    bad = ~np.isin(values, (0.0, 1.0))
    if bad.any():
        pos = int(np.flatnonzero(bad)[0])
        raise DataParseError(
            f"column '{column}' must be 0 or 1, got '{frame[column].iloc[pos]}' at row {pos + first_row}",
            row=pos + first_row,
            column=column,
        )
    return values.astype(bool)


def load_csv(path: Union[str, Path], schema: AttributeSchema) -> ChoiceDataset:
    """
    Load a long-format choice file.

    Parameters:
    -----------
    path : str or Path
        CSV file, UTF-8, comma separated, header row required.
    schema : AttributeSchema
        Attribute and covariate columns expected after the reserved columns.

    Returns:
    --------
    ChoiceDataset
        Situations in order of first appearance; alternatives in row order.

    Raises:
    -------
    SchemaError
        A required column is missing.
    DataParseError
        A cell is missing or non-numeric (row number is the file line).
    IntegrityError
        A situation has zero or several chosen rows, or inconsistent
        case-level values.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"data file not found: {path}")

    skipped = _count_header_comments(path)
    frame = pd.read_csv(
        path, dtype=str, skiprows=skipped, keep_default_na=False, encoding="utf-8"
    )
    frame.columns = [str(c).strip() for c in frame.columns]
    required = list(RESERVED_COLUMNS) + schema.attribute_names + schema.covariate_names
    for column in required:
        if column not in frame.columns:
            raise SchemaError(f"missing column '{column}' in {path}", column=column)
    extra = [c for c in frame.columns if c not in required and c != SEGMENT_COLUMN]
    if extra:
        logger.debug(f"Ignoring unused columns in {path}: {extra}")
    if frame.empty:
        raise SchemaError(f"no data rows in {path}")

    # header line plus skipped comment lines precede the first data row
    first_row = skipped + 2
    chosen = _parse_flag(frame, "chosen", first_row)
    available = _parse_flag(frame, "available", first_row)
    attributes = np.column_stack([_parse_numeric(frame, c, first_row) for c in schema.attribute_names])
    if schema.covariate_names:
        covariates = np.column_stack([_parse_numeric(frame, c, first_row) for c in schema.covariate_names])
    else:
        covariates = np.zeros((len(frame), 0))

    situation_ids = frame["situation_id"].str.strip()
    codes, uniques = pd.factorize(situation_ids, sort=False)
    slots = pd.Series(codes).groupby(codes, sort=False).cumcount().to_numpy()
    n, width = len(uniques), int(slots.max()) + 1

    n_chosen = np.bincount(codes, weights=chosen.astype(float), minlength=n)
    bad = np.flatnonzero(n_chosen != 1)
    if bad.size:
        sid = str(uniques[bad[0]])
        kind = "no chosen row" if n_chosen[bad[0]] == 0 else f"{int(n_chosen[bad[0]])} chosen rows"
        raise IntegrityError(f"situation '{sid}' has {kind}; exactly one is required", situation_id=sid)

    _, first = np.unique(codes, return_index=True)
    respondents = frame["respondent_id"].str.strip().to_numpy(dtype=object)
    mismatch = respondents != respondents[first][codes]
    segments = None
    if SEGMENT_COLUMN in frame.columns:
        segments = frame[SEGMENT_COLUMN].str.strip().to_numpy(dtype=object)
        mismatch |= segments != segments[first][codes]
    if covariates.shape[1]:
        mismatch |= np.any(covariates != covariates[first][codes], axis=1)
    if mismatch.any():
        sid = str(uniques[codes[int(np.flatnonzero(mismatch)[0])]])
        raise IntegrityError(
            f"situation '{sid}' has inconsistent respondent, covariate or product values across rows",
            situation_id=sid,
        )

    alt_ids = np.full((n, width), "", dtype=object)
    attr = np.zeros((n, width, schema.n_attributes))
    avail = np.zeros((n, width), dtype=bool)
    present = np.zeros((n, width), dtype=bool)
    chosen_slot = np.full(n, -1, dtype=np.int64)

    alt_ids[codes, slots] = frame["alt_id"].str.strip().to_numpy(dtype=object)
    attr[codes, slots] = attributes
    avail[codes, slots] = available
    present[codes, slots] = True
    chosen_slot[codes[chosen]] = slots[chosen]

    dataset = ChoiceDataset(
        schema=schema,
        situation_ids=np.asarray(uniques, dtype=object),
        respondent_ids=respondents[first],
        alt_ids=alt_ids,
        attributes=attr,
        available=avail,
        present=present,
        chosen=chosen_slot,
        covariates=covariates[first],
        segments=None if segments is None else segments[first],
    )
    logger.info(f"Loaded {n} choice situations ({len(frame)} rows, J<={width}) from {path}")
    return dataset


def dataset_to_frame(ds: ChoiceDataset) -> pd.DataFrame:
    """Long-format frame of the present slots, in situation then slot order."""
    rows, slots = np.nonzero(ds.present)
    frame = pd.DataFrame(
        {
            "situation_id": ds.situation_ids[rows],
            "respondent_id": ds.respondent_ids[rows],
            "alt_id": ds.alt_ids[rows, slots],
            "chosen": (ds.chosen[rows] == slots).astype(int),
            "available": ds.available[rows, slots].astype(int),
        }
    )
    for k, name in enumerate(ds.schema.attribute_names):
        frame[name] = ds.attributes[rows, slots, k]
    for c, name in enumerate(ds.schema.covariate_names):
        frame[name] = ds.covariates[rows, c]
    if ds.segment_labels:
        frame[SEGMENT_COLUMN] = ds.segments[rows]
    return frame


def write_csv(ds: ChoiceDataset, path: Union[str, Path], header_comment: Optional[str] = None) -> Path:
    """
    Write ``ds`` in the format read by :func:`load_csv`.

    Real values are written with 12 significant digits. Datasets without
    simulated choices are written with ``chosen`` all zero.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = dataset_to_frame(ds)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        if header_comment:
            handle.write(f"# {header_comment}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.info(f"Wrote {len(ds)} choice situations to {path}")
    return path
