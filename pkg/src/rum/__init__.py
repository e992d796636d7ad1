"""Random-utility choice models and the shared specification layer."""

from .draws import DrawMatrix, make_draws, read_draws, write_draws
from .logit import RumModel, mixed_logit_probability, mnl_probability, rum_log_likelihood
from .simulation import ChoiceModel, LikelihoodResult
from .spec import DesignMatrix, ModelKind, ModelSpec, ParameterVector, RandomCoefficient, Term, build_design

__all__ = [
    "ChoiceModel",
    "DesignMatrix",
    "DrawMatrix",
    "LikelihoodResult",
    "ModelKind",
    "ModelSpec",
    "ParameterVector",
    "RandomCoefficient",
    "RumModel",
    "Term",
    "build_design",
    "make_draws",
    "mixed_logit_probability",
    "mnl_probability",
    "read_draws",
    "rum_log_likelihood",
    "write_draws",
]
