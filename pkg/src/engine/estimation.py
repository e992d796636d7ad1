#!/usr/bin/env python3
"""
Estimation driver shared by the utility and regret families.
"""

import logging
from typing import Optional, Union

import numpy as np
from pydantic import Field

from src.choicedata.models import ChoiceDataset
from src.core.errors import ConfigError
from src.rrm.regret import RrmModel
from src.rum.draws import DrawMatrix
from src.rum.logit import RumModel
from src.rum.simulation import ChoiceModel
from src.rum.spec import ModelKind, ModelSpec, ParameterVector
from .covariance import HESSIAN_STEP, covariance
from .optimizer import OptimizerSettings, maximize
from .results import EstimationResult

logger = logging.getLogger(__name__)


class EstimationSettings(OptimizerSettings):
    """Optimizer tolerances plus simulation and covariance options."""

    hessian_step: float = Field(default=HESSIAN_STEP, gt=0)
    n_draws: int = Field(default=500, ge=1)
    draw_kind: str = "halton"
    draws_per: str = "respondent"
    sd_start: float = 0.1
    compute_covariance: bool = True

    def optimizer(self) -> OptimizerSettings:
        return OptimizerSettings(
            gradient_tolerance=self.gradient_tolerance,
            relative_tolerance=self.relative_tolerance,
            max_iterations=self.max_iterations,
        )


def model_for(kind: Union[ModelKind, str], spec: ModelSpec) -> ChoiceModel:
    """Likelihood object of the requested family."""
    kind = ModelKind(kind)
    return RumModel(spec) if kind is ModelKind.RUM else RrmModel(spec)


def null_loglik(ds: ChoiceDataset) -> float:
    """Equal-shares log-likelihood, ``sum(-ln J_available)``."""
    n_available = ds.n_available
    if np.any(n_available < 1):
        raise ValueError("a situation has no available alternative")
    return float(-np.sum(np.log(n_available)))


def fixed_counterpart(spec: ModelSpec) -> ModelSpec:
    """The same terms with every coefficient fixed."""
    return spec.model_copy(update={"random_coefficients": ()})


def estimate(
    spec: ModelSpec,
    ds: ChoiceDataset,
    kind: Union[ModelKind, str] = ModelKind.RUM,
    settings: Optional[EstimationSettings] = None,
    seed: Optional[int] = None,
    draws: Optional[DrawMatrix] = None,
    start: Optional[ParameterVector] = None,
    config_hash: Optional[str] = None,
) -> EstimationResult:
    """
    Maximum (simulated) likelihood estimation.

    Starts from zeros, or for random coefficients from the fixed-coefficient
    estimates with spreads at ``settings.sd_start``.

    Parameters:
    -----------
    spec : ModelSpec
        Model terms; checked against the dataset schema.
    ds : ChoiceDataset
        Validated data with observed choices.
    kind : ModelKind
        RUM or RRM.
    settings : EstimationSettings
        Tolerances, draws and whether to compute the covariance.
    seed : int
        Needed for pseudo-random draws; recorded in the result.
    draws : DrawMatrix
        Precomputed draws (overrides the settings).
    start : ParameterVector
        Explicit starting point.
    """
    settings = settings or EstimationSettings()
    kind = ModelKind(kind)
    model = model_for(kind, spec)
    spec.check_schema(ds.schema)

    if spec.has_random and draws is None:
        if settings.draw_kind != "halton" and seed is None:
            raise ConfigError("pseudo-random draws need a seed")
        draws = model.make_draws(ds, settings.n_draws, settings.draw_kind, seed, settings.draws_per)

    if start is None:
        start = _starting_point(spec, ds, kind, settings)
    logger.info(
        f"Estimating {kind.value} model with {spec.n_parameters} parameters on {len(ds)} situations"
        + (f" ({draws.n_draws} {draws.kind} draws)" if draws is not None else "")
    )

    objective = model.objective(ds, draws)
    outcome = maximize(objective, start, settings.optimizer())
    params = ParameterVector(tuple(spec.parameter_names), outcome.theta)

    cov = None
    if settings.compute_covariance:
        cov = covariance(objective, params, settings.hessian_step)

    result = EstimationResult.build(
        kind=kind,
        spec=spec,
        params=params,
        cov=cov,
        loglik=outcome.loglik,
        loglik_null=null_loglik(ds),
        n_observations=len(ds),
        iterations=outcome.iterations,
        converged=outcome.converged,
        gradient_norm=outcome.gradient_norm,
        message=outcome.message,
        seed=seed,
        n_draws=draws.n_draws if draws is not None else None,
        draw_kind=draws.kind if draws is not None else None,
        settings=settings.model_dump(),
        config_hash=config_hash,
    )
    logger.info(
        f"{kind.value} estimation {'converged' if result.converged else 'did NOT converge'}: "
        f"loglik={result.loglik_final:.4f}, rho2={result.rho_squared:.4f}"
    )
    return result


def _starting_point(spec: ModelSpec, ds: ChoiceDataset, kind: ModelKind,
                    settings: EstimationSettings) -> ParameterVector:
    if not spec.has_random:
        return ParameterVector.zeros(spec)
    logger.info("Warm start: estimating the fixed-coefficient model first")
    warm = estimate(
        fixed_counterpart(spec), ds, kind, settings.model_copy(update={"compute_covariance": False})
    )
    means = np.array([warm.params[name] for name in warm.parameter_names])
    spreads = np.full(len(spec.sd_names), settings.sd_start)
    return ParameterVector(tuple(spec.parameter_names), np.concatenate([means, spreads]))
