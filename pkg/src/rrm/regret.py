#!/usr/bin/env python3
"""
Random regret minimization.

The regret of alternative ``i`` sums, over every other available
alternative ``j`` and every design column ``k``,
``ln(1 + exp(beta_k * (x_jk - x_ik)))``. Choice probabilities are a softmax
of negative regrets. Alternative-specific constants are indicator columns
and enter the pairwise sum like any attribute.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit

from src.choicedata.models import ChoiceDataset, ChoiceSituation
from src.rum.draws import DrawMatrix
from src.rum.logit import unit_draws
from src.rum.simulation import ChoiceModel, LikelihoodResult, check_finite, masked_softmax
from src.rum.spec import ModelKind, ModelSpec, ParameterVector

logger = logging.getLogger(__name__)

SOFTPLUS_SWITCH = 30.0


def softplus(z):
    """``ln(1 + exp(z))`` without overflow."""
    z = np.asarray(z, dtype=float)
    large = z > SOFTPLUS_SWITCH
    safe = np.where(large, 0.0, z)
    out = np.where(large, z + np.log1p(np.exp(-np.abs(z))), np.log1p(np.exp(safe)))
    return out if out.ndim else float(out)


def pairwise_regret(beta_k: float, x_jk: float, x_ik: float) -> float:
    """Regret of ``i`` against ``j`` on one attribute."""
    return float(softplus(beta_k * (x_jk - x_ik)))


def _pair_mask(available: np.ndarray) -> np.ndarray:
    """(n, J, J) mask of ordered pairs ``(i, j)``, both available, ``i != j``."""
    j = available.shape[1]
    return available[:, :, None] & available[:, None, :] & ~np.eye(j, dtype=bool)[None]


def regret_components(
    Z: np.ndarray,
    available: np.ndarray,
    beta: np.ndarray,
    realized: Optional[np.ndarray],
    random_columns: Tuple[int, ...],
    with_gradient: bool = True,
):
    """
    Regrets (n, R, J) and their derivatives.

    Returns ``(regret, grad_fixed, grad_random)``: ``grad_fixed`` is
    (n, J, C) with the random columns zeroed, ``grad_random`` is
    (n, R, J, S) or None. Both are None when ``with_gradient`` is False.
    """
    rc = list(random_columns)
    fixed = np.ones(Z.shape[2], dtype=bool)
    fixed[rc] = False
    mask = _pair_mask(available)
    Z = np.where(available[:, :, None], Z, 0.0)
    # diff[n, i, j, c] = z_jc - z_ic
    diff = Z[:, None, :, :] - Z[:, :, None, :]
    diff_f = diff[..., fixed]
    z = diff_f * beta[fixed]
    regret = (softplus(z).sum(axis=-1) * mask).sum(axis=2)[:, None, :]
    grad_f = grad_r = None
    if with_gradient:
        grad_f = np.zeros(Z.shape[:2] + (Z.shape[2],))
        grad_f[..., fixed] = np.einsum("nij,nijc->nic", mask.astype(float), expit(z) * diff_f)
    if realized is not None:
        diff_r = diff[..., rc]
        z_r = diff_r[:, None] * realized[:, :, None, None, :]
        pair = mask[:, None, :, :].astype(float)
        regret = regret + np.einsum("nrij,nrij->nri", pair, softplus(z_r).sum(axis=-1))
        if with_gradient:
            grad_r = np.einsum("nrij,nrijs->nris", pair, expit(z_r) * diff_r[:, None])
    return regret, grad_f, grad_r


class RrmModel(ChoiceModel):
    """Logit over negative regrets."""

    kind = ModelKind.RRM

    def row_cost(self, n_draws: int, n_alts: int, n_columns: int, n_random: int) -> int:
        return n_alts * n_alts * (3 * n_columns + n_draws * (3 * max(n_random, 1) + 1))

    def kernel(self, Z, available, chosen, beta, realized, random_columns):
        need = chosen is not None
        regret, grad_f, grad_r = regret_components(Z, available, beta, realized, random_columns, need)
        check_finite(regret, available[:, None, :], "regret")
        P = masked_softmax(-regret, available[:, None, :])
        if not need:
            return P, None
        rows = np.arange(Z.shape[0])
        score = -grad_f[rows, chosen][:, None, :] + np.einsum("nri,nic->nrc", P, grad_f)
        if grad_r is not None:
            rc = list(random_columns)
            score[:, :, rc] = -grad_r[rows, :, chosen] + np.einsum("nri,nris->nrs", P, grad_r)
        return P, score


@dataclass(frozen=True)
class RegretContext:
    """A model specification with the parameters it is evaluated at."""
    spec: ModelSpec
    params: ParameterVector

    @property
    def model(self) -> RrmModel:
        return RrmModel(self.spec)


def situation_regrets(ctx: RegretContext, situation: ChoiceSituation) -> np.ndarray:
    """
    Regret of every slot of one situation at the coefficient means.

    Unavailable slots get NaN.
    """
    ds = ChoiceDataset.from_situations(situation.schema, [situation])
    design = ctx.model.design(ds)
    beta, _ = design.split(ctx.model._theta(ctx.params))
    regret, _, _ = regret_components(design.Z, design.available, beta, None, (), with_gradient=False)
    out = regret[0, 0, ds.present[0]]
    return np.where(ds.available[0, ds.present[0]], out, np.nan)


def total_regret(ctx: RegretContext, situation: ChoiceSituation, i: int) -> float:
    """
    Regret of alternative ``i`` (0-based position in the situation).

    Random coefficients are evaluated at their means.
    """
    if not 0 <= i < len(situation.alternatives):
        raise IndexError(f"situation '{situation.situation_id}' has no alternative {i}")
    if not situation.alternatives[i].available:
        raise ValueError(
            f"alternative '{situation.alternatives[i].alt_id}' is unavailable in situation '{situation.situation_id}'"
        )
    return float(situation_regrets(ctx, situation)[i])


def rrm_probability(
    ctx: RegretContext, situation: ChoiceSituation, draws: Optional[DrawMatrix] = None, unit: int = 0
) -> np.ndarray:
    """
    Regret-based choice probabilities for one situation.

    With random coefficients, ``draws`` is required and the probabilities are
    averaged over the draws of decision unit ``unit`` (default 0).
    """
    if ctx.spec.has_random:
        if draws is None:
            raise ValueError("draws are required for a model with random coefficients")
        draws = unit_draws(draws, unit)
    return ctx.model.situation_probabilities(ctx.params, situation, draws)


def rrm_log_likelihood(
    ctx: RegretContext, ds: ChoiceDataset, draws: Optional[DrawMatrix] = None
) -> LikelihoodResult:
    """Simulated log-likelihood and its exact gradient over ``ds``."""
    return ctx.model.loglik(ctx.params, ds, draws)
