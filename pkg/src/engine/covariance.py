#!/usr/bin/env python3
"""
Covariance of maximum-likelihood estimates.

The Hessian is built from central differences of the analytic gradient, so
one routine serves every model family.
"""

import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import SingularHessianError
from src.rum.spec import ParameterVector

logger = logging.getLogger(__name__)

HESSIAN_STEP = 1e-4
SINGULAR_TOLERANCE = 1e-10


def numerical_hessian(
    objective: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    theta: np.ndarray,
    step: float = HESSIAN_STEP,
) -> np.ndarray:
    """Symmetrized central-difference Jacobian of the gradient at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    hessian = np.empty((n, n))
    for i in range(n):
        h = step * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        hessian[:, i] = (np.asarray(objective(up)[1]) - np.asarray(objective(down)[1])) / (2.0 * h)
    return 0.5 * (hessian + hessian.T)


def most_collinear_pair(hessian: np.ndarray, names: Sequence[str]) -> Tuple[str, str]:
    """
    Parameter pair with the largest absolute off-diagonal correlation of the
    pseudo-inverse; a parameter with a vanishing Hessian row pairs with itself.
    """
    scale = np.max(np.abs(hessian)) if hessian.size else 0.0
    empty = np.flatnonzero(np.all(np.abs(hessian) <= SINGULAR_TOLERANCE * max(scale, 1e-300), axis=1))
    if empty.size:
        return names[empty[0]], names[empty[0]]
    pinv = np.linalg.pinv(hessian)
    sd = np.sqrt(np.abs(np.diag(pinv)))
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(np.outer(sd, sd) > 0, pinv / np.outer(sd, sd), 0.0)
    np.fill_diagonal(corr, 0.0)
    i, j = np.unravel_index(int(np.argmax(np.abs(corr))), corr.shape)
    i, j = sorted((int(i), int(j)))
    return names[i], names[j]


def covariance_from_hessian(hessian: np.ndarray, names: Optional[Sequence[str]] = None) -> np.ndarray:
    """
    Negative inverse of a log-likelihood Hessian.

    Raises:
    -------
    SingularHessianError
        Smallest singular value below 1e-10 of the largest; the error names
        the most collinear parameter pair.
    """
    names = list(names) if names is not None else [f"theta_{i}" for i in range(hessian.shape[0])]
    if not np.all(np.isfinite(hessian)):
        raise SingularHessianError("Hessian has non-finite entries")
    singular = np.linalg.svd(hessian, compute_uv=False)
    if singular.size == 0 or singular.min() < SINGULAR_TOLERANCE * max(singular.max(), 1e-300):
        pair = most_collinear_pair(hessian, names)
        raise SingularHessianError(
            f"Hessian is not invertible; parameters '{pair[0]}' and '{pair[1]}' are not separately identified",
            pair=pair,
        )
    cov = -np.linalg.inv(hessian)
    cov = 0.5 * (cov + cov.T)
    if np.any(np.diag(cov) <= 0):
        logger.warning("Covariance has non-positive variances; the point is not a local maximum")
    return cov


def covariance(
    objective: Callable[[np.ndarray], Tuple[float, np.ndarray]],
    at: Union[ParameterVector, np.ndarray],
    step: float = HESSIAN_STEP,
) -> np.ndarray:
    """Covariance at ``at`` from the numerical Hessian of ``objective``."""
    names = at.names if isinstance(at, ParameterVector) else None
    theta = at.values if isinstance(at, ParameterVector) else np.asarray(at, dtype=float)
    return covariance_from_hessian(numerical_hessian(objective, theta, step), names)


def standard_errors(cov: np.ndarray) -> np.ndarray:
    """Square roots of the variances; NaN where a variance is not positive."""
    variances = np.diag(cov)
    return np.where(variances > 0, np.sqrt(np.abs(variances)), np.nan)
