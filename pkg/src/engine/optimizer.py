#!/usr/bin/env python3
"""
Quasi-Newton maximization of a log-likelihood.

BFGS on the negated objective with a strong-Wolfe line search
(``scipy.optimize.line_search``) and Armijo backtracking when that fails.
The inverse-Hessian estimate is rescaled after the first step and reset to
the identity whenever the search direction stops being an ascent direction.
"""

import logging
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import line_search

from src.core.errors import EstimationError
from src.rum.spec import ParameterVector

logger = logging.getLogger(__name__)

Objective = Callable[[np.ndarray], Tuple[float, np.ndarray]]


class OptimizerSettings(BaseModel):
    """Termination tolerances of :func:`maximize`."""
    model_config = ConfigDict(frozen=True)

    gradient_tolerance: float = Field(default=1e-5, gt=0)
    relative_tolerance: float = Field(default=1e-9, gt=0)
    max_iterations: int = Field(default=500, ge=1)


@dataclass
class OptimizationOutcome:
    """Where the ascent stopped and why."""
    theta: np.ndarray
    loglik: float
    gradient: np.ndarray
    iterations: int
    converged: bool
    message: str
    trace: List[float] = field(default_factory=list)

    @property
    def gradient_norm(self) -> float:
        return float(np.max(np.abs(self.gradient))) if self.gradient.size else 0.0


class _NegatedObjective:
    """Minimization view of an objective; remembers the last evaluation."""

    def __init__(self, objective: Objective):
        self.objective = objective
        self.evaluations = 0
        self._key = None
        self._value = None

    def __call__(self, theta: np.ndarray) -> Tuple[float, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        key = theta.tobytes()
        if key != self._key:
            loglik, grad = self.objective(theta)
            self.evaluations += 1
            self._key = key
            self._value = (-float(loglik), -np.asarray(grad, dtype=float))
        return self._value

    def value(self, theta: np.ndarray) -> float:
        return self(theta)[0]

    def gradient(self, theta: np.ndarray) -> np.ndarray:
        return self(theta)[1]


def _backtrack(fun: _NegatedObjective, x: np.ndarray, f: float, g: np.ndarray, p: np.ndarray,
               alpha: float = 1.0, shrink: float = 0.5, c1: float = 1e-4, tries: int = 40) -> Optional[float]:
    slope = float(g @ p)
    for _ in range(tries):
        trial = fun.value(x + alpha * p)
        if np.isfinite(trial) and trial <= f + c1 * alpha * slope:
            return alpha
        alpha *= shrink
    return None


def maximize(
    objective: Objective,
    start: Union[ParameterVector, np.ndarray],
    settings: Optional[OptimizerSettings] = None,
) -> OptimizationOutcome:
    """
    Maximize ``objective`` from ``start``.

    Parameters:
    -----------
    objective : callable
        ``theta -> (loglik, gradient)``.
    start : ParameterVector or array
        Starting point.
    settings : OptimizerSettings
        Tolerances; stops when the gradient infinity-norm or the relative
        objective change falls below them, or at the iteration cap.

    Returns:
    --------
    OptimizationOutcome
        ``converged`` is False when the iteration cap was hit or the line
        search failed; the best point found is returned either way.
    """
    settings = settings or OptimizerSettings()
    x = np.array(start.values if isinstance(start, ParameterVector) else start, dtype=float)
    fun = _NegatedObjective(objective)
    f, g = fun(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise EstimationError(f"objective is not finite at the starting point (loglik={-f})")

    n = x.size
    identity = np.eye(n)
    H = identity.copy()
    trace = [-f]
    old_f = None
    if np.max(np.abs(g), initial=0.0) < settings.gradient_tolerance:
        return OptimizationOutcome(x, -f, -g, 0, True, "gradient below tolerance at start", trace)

    converged, message, iteration = False, "iteration limit reached", 0
    for iteration in range(1, settings.max_iterations + 1):
        p = -H @ g
        if not g @ p < 0:
            H = identity.copy()
            p = -g
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            alpha = line_search(fun.value, fun.gradient, x, p, gfk=g, old_fval=f, old_old_fval=old_f)[0]
        if alpha is None:
            alpha = _backtrack(fun, x, f, g, p)
        if alpha is None:
            message = "line search failed"
            break
        x_new = x + alpha * p
        f_new, g_new = fun(x_new)
        if not np.isfinite(f_new) or f_new > f:
            message = "line search failed"
            break

        s, y = x_new - x, g_new - g
        change = abs(f - f_new) / max(abs(f), abs(f_new), 1.0)
        old_f, x, f, g = f, x_new, f_new, g_new
        trace.append(-f)
        logger.debug(f"iteration {iteration}: loglik={-f:.10g} step={alpha:.3g} |g|={np.max(np.abs(g)):.3g}")

        if np.max(np.abs(g)) < settings.gradient_tolerance:
            converged, message = True, "gradient below tolerance"
            break
        if change < settings.relative_tolerance:
            converged, message = True, "relative change below tolerance"
            break

        sy = float(s @ y)
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            if iteration == 1:
                H = (sy / float(y @ y)) * identity
            rho = 1.0 / sy
            H = (identity - rho * np.outer(s, y)) @ H @ (identity - rho * np.outer(y, s)) + rho * np.outer(s, s)

    outcome = OptimizationOutcome(x, -f, -g, iteration, converged, message, trace)
    log = logger.info if converged else logger.warning
    log(
        f"Optimizer stopped after {iteration} iterations ({message}): loglik={outcome.loglik:.6f}, "
        f"|g|={outcome.gradient_norm:.3g}, {fun.evaluations} evaluations"
    )
    return outcome
