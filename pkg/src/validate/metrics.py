#!/usr/bin/env python3
"""Prediction error measures."""

from typing import Sequence

import numpy as np

from src.core.errors import MapeUndefinedError


def mape(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """
    Mean absolute percentage error, ``100 / N * sum(|(Y - Yhat) / Y|)``.

    Raises:
    -------
    MapeUndefinedError
        Some actual value is zero.
    """
    actual = np.asarray(actual, dtype=float).reshape(-1)
    predicted = np.asarray(predicted, dtype=float).reshape(-1)
    if actual.shape != predicted.shape:
        raise ValueError(f"actual and predicted differ in length ({actual.size} vs {predicted.size})")
    if actual.size == 0:
        raise ValueError("MAPE needs at least one value")
    zero = np.flatnonzero(actual == 0)
    if zero.size:
        raise MapeUndefinedError(f"MAPE is undefined: actual value at position {int(zero[0])} is zero")
    return float(100.0 / actual.size * np.sum(np.abs((actual - predicted) / actual)))
