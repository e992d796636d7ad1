"""Maximum-likelihood machinery shared by every model family."""

from .covariance import covariance, numerical_hessian, standard_errors
from .estimation import EstimationSettings, estimate, model_for, null_loglik
from .optimizer import OptimizationOutcome, OptimizerSettings, maximize
from .results import EstimationResult, fit_statistics, significance_mark

__all__ = [
    "EstimationResult",
    "EstimationSettings",
    "OptimizationOutcome",
    "OptimizerSettings",
    "covariance",
    "estimate",
    "fit_statistics",
    "maximize",
    "model_for",
    "null_loglik",
    "numerical_hessian",
    "significance_mark",
    "standard_errors",
]
