#!/usr/bin/env python3
"""
K-fold partitioning of choice datasets for out-of-sample scoring.
"""

import logging
from typing import List, Tuple

import numpy as np
import pandas as pd

from src.core.seeding import substream
from .models import ChoiceDataset

logger = logging.getLogger(__name__)

SPLIT_UNITS = ("situation", "respondent")


def fold_assignment(ds: ChoiceDataset, folds: int, seed: int, by: str = "situation") -> np.ndarray:
    """
    Fold index (0..folds-1) for every situation.

    Units (situations, or respondents with ``by="respondent"``) are shuffled
    with the ``split`` substream of ``seed`` and cut into ``folds`` nearly
    equal consecutive blocks, so fold sizes differ by at most one unit.
    """
    if by not in SPLIT_UNITS:
        raise ValueError(f"unknown split unit '{by}', expected one of {SPLIT_UNITS}")
    if folds < 2:
        raise ValueError(f"at least 2 folds are required, got {folds}")
    if by == "respondent":
        unit_of, units = pd.factorize(pd.Series(ds.respondent_ids), sort=False)
        n_units = len(units)
    else:
        unit_of, n_units = np.arange(len(ds)), len(ds)
    if folds > n_units:
        raise ValueError(f"cannot split {n_units} {by}s into {folds} folds")

    order = substream(seed, "split").permutation(n_units)
    unit_fold = np.empty(n_units, dtype=np.int64)
    for f, block in enumerate(np.array_split(order, folds)):
        unit_fold[block] = f
    return unit_fold[unit_of]


def split_kfold(
    ds: ChoiceDataset, folds: int, seed: int, by: str = "situation"
) -> List[Tuple[ChoiceDataset, ChoiceDataset]]:
    """
    Partition ``ds`` into ``folds`` (train, test) pairs.

    Test sets are disjoint and together cover every situation; alternatives
    of one situation are never separated. Situations keep their original
    order inside each part. Deterministic given ``seed``.
    """
    assignment = fold_assignment(ds, folds, seed, by=by)
    pairs = []
    for f in range(folds):
        test = np.flatnonzero(assignment == f)
        train = np.flatnonzero(assignment != f)
        pairs.append((ds.subset(train), ds.subset(test)))
        logger.debug(f"Fold {f}: {len(train)} training / {len(test)} test situations")
    return pairs
