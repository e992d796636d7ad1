#!/usr/bin/env python3
"""
Random-utility models: multinomial logit and mixed logit.

Utility is linear in the design columns, ``V[n, j] = Z[n, j] @ beta``. For
mixed logit the random columns take ``mean + |sd| * draw`` per draw and the
logit kernel is averaged over draws.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src.choicedata.models import ChoiceDataset, ChoiceSituation
from src.core.errors import UnsupportedModelError
from .draws import DrawMatrix
from .simulation import ChoiceModel, LikelihoodResult, check_finite, masked_softmax
from .spec import ModelKind, ModelSpec, ParameterVector

logger = logging.getLogger(__name__)


class RumModel(ChoiceModel):
    """Logit kernel over linear utilities."""

    kind = ModelKind.RUM

    def row_cost(self, n_draws: int, n_alts: int, n_columns: int, n_random: int) -> int:
        return n_draws * n_alts * (n_columns + 2)

    def utilities(self, Z: np.ndarray, beta: np.ndarray, realized: Optional[np.ndarray],
                  random_columns: Tuple[int, ...]) -> np.ndarray:
        """(n, R, J) utilities; R is 1 without random columns."""
        V = (Z @ beta)[:, None, :]
        if realized is not None:
            rc = list(random_columns)
            V = V + np.einsum("njs,nrs->nrj", Z[:, :, rc], realized - beta[rc])
        return V

    def kernel(self, Z, available, chosen, beta, realized, random_columns):
        V = self.utilities(Z, beta, realized, random_columns)
        check_finite(V, available[:, None, :], "utility")
        P = masked_softmax(V, available[:, None, :])
        if chosen is None:
            return P, None
        z_chosen = Z[np.arange(Z.shape[0]), chosen]
        score = z_chosen[:, None, :] - np.einsum("nrj,njc->nrc", P, Z)
        return P, score


def _require_fixed(spec: ModelSpec) -> None:
    if spec.has_random:
        raise UnsupportedModelError(
            "mnl_probability needs a model without random coefficients; use mixed_logit_probability"
        )


def mnl_probability(spec: ModelSpec, params: ParameterVector, situation: ChoiceSituation) -> np.ndarray:
    """
    Multinomial logit probabilities for one situation.

    Unavailable alternatives get probability 0 and are left out of the
    denominator.
    """
    _require_fixed(spec)
    return RumModel(spec).situation_probabilities(params, situation)


def unit_draws(draws: DrawMatrix, unit: int) -> DrawMatrix:
    """Draws of decision unit ``unit`` mapped onto a single situation."""
    if not 0 <= unit < draws.n_units:
        raise ValueError(f"draws hold {draws.n_units} decision units, no unit {unit}")
    return DrawMatrix(draws=draws.draws, unit_index=np.full(1, unit, dtype=np.int64), kind=draws.kind)


def mixed_logit_probability(
    spec: ModelSpec, params: ParameterVector, situation: ChoiceSituation, draws: DrawMatrix, unit: int = 0
) -> np.ndarray:
    """
    Simulated mixed logit probabilities for one situation.

    The situation is evaluated with the draws of decision unit ``unit``
    (``draws.unit_index[n]`` for situation ``n`` of the dataset the draws were
    made for); the default is unit 0.
    """
    if draws.n_draws < 1:
        raise ValueError("at least one draw per unit is required (R = 0)")
    model = RumModel(spec)
    if not spec.has_random:
        return model.situation_probabilities(params, situation)
    return model.situation_probabilities(params, situation, unit_draws(draws, unit))


def rum_log_likelihood(
    spec: ModelSpec, params: ParameterVector, ds: ChoiceDataset, draws: Optional[DrawMatrix] = None
) -> LikelihoodResult:
    """Simulated log-likelihood and its exact gradient over ``ds``."""
    return RumModel(spec).loglik(params, ds, draws)
