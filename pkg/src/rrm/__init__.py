"""Random regret minimization models."""

from .regret import (
    RegretContext,
    RrmModel,
    pairwise_regret,
    rrm_log_likelihood,
    rrm_probability,
    softplus,
    total_regret,
)

__all__ = [
    "RegretContext",
    "RrmModel",
    "pairwise_regret",
    "rrm_log_likelihood",
    "rrm_probability",
    "softplus",
    "total_regret",
]
