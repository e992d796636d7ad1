#!/usr/bin/env python3
"""
Shared (simulated) maximum-likelihood machinery for choice models.

A model supplies a *kernel*: for a block of situations and a set of realized
coefficients it returns choice probabilities per draw and the score of the
chosen alternative's log-probability with respect to every column
coefficient. This module averages kernels over draws, forms the simulated
log-likelihood and maps scores to the gradient over means and spreads.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from src.choicedata.models import ChoiceDataset, ChoiceSituation
from src.core.errors import NumericError
from .draws import DrawMatrix, make_draws
from .spec import DesignMatrix, ModelKind, ModelSpec, ParameterVector, build_design

logger = logging.getLogger(__name__)

PROBABILITY_FLOOR = 1e-300
CHUNK_BUDGET = 1 << 22


@dataclass(frozen=True)
class LikelihoodResult:
    """Log-likelihood, its gradient, and how many chosen probabilities were clamped."""
    loglik: float
    gradient: np.ndarray
    names: Tuple[str, ...]
    n_clamped: int = 0

    def gradient_dict(self) -> Dict[str, float]:
        return {name: float(g) for name, g in zip(self.names, self.gradient)}


def masked_softmax(values: np.ndarray, available: np.ndarray) -> np.ndarray:
    """
    Softmax over the last axis restricted to available alternatives.

    Unavailable entries get probability 0 and never enter the denominator.
    """
    masked = np.where(available, values, -np.inf)
    shift = masked.max(axis=-1, keepdims=True)
    expo = np.where(available, np.exp(np.where(available, values - shift, 0.0)), 0.0)
    return expo / expo.sum(axis=-1, keepdims=True)


def check_finite(values: np.ndarray, available: np.ndarray, what: str) -> None:
    available = np.broadcast_to(available, values.shape)
    if not np.all(np.isfinite(values[available])):
        raise NumericError(f"non-finite {what} for an available alternative")


class ChoiceModel(ABC):
    """Base class binding a :class:`ModelSpec` to a probability kernel."""

    kind: ModelKind

    def __init__(self, spec: ModelSpec):
        self.spec = spec

    @abstractmethod
    def kernel(
        self,
        Z: np.ndarray,
        available: np.ndarray,
        chosen: Optional[np.ndarray],
        beta: np.ndarray,
        realized: Optional[np.ndarray],
        random_columns: Tuple[int, ...],
    ) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """
        Probabilities (n, R, J) and, when ``chosen`` is given, the score
        (n, R, C) of log P(chosen) with respect to the column coefficients.
        ``realized`` holds the (n, R, S) coefficients of the random columns.
        """

    @abstractmethod
    def row_cost(self, n_draws: int, n_alts: int, n_columns: int, n_random: int) -> int:
        """Array elements touched per situation, used to size blocks."""

    # -- helpers -------------------------------------------------------------

    def design(self, ds: ChoiceDataset) -> DesignMatrix:
        return build_design(self.spec, ds)

    def make_draws(
        self, ds: ChoiceDataset, n_draws: int = 500, kind: str = "halton",
        seed: Optional[int] = None, per: str = "respondent",
    ) -> Optional[DrawMatrix]:
        """Draws for ``ds`` if the spec has random coefficients, else None."""
        if not self.spec.has_random:
            return None
        return make_draws(ds.respondent_ids, len(self.spec.random_coefficients), n_draws, kind, seed, per)

    def _theta(self, params) -> np.ndarray:
        if isinstance(params, ParameterVector):
            if list(params.names) != self.spec.parameter_names:
                raise ValueError(
                    f"parameter names {list(params.names)} do not match the model {self.spec.parameter_names}"
                )
            return params.values
        return np.asarray(params, dtype=float)

    def _blocks(self, design: DesignMatrix, draws: Optional[DrawMatrix]):
        n_random = len(design.random_columns)
        if n_random:
            if draws is None:
                raise ValueError("draws are required for a model with random coefficients")
            if draws.n_dims < n_random:
                raise ValueError(f"draws have {draws.n_dims} dimensions, model needs {n_random}")
            if len(draws.unit_index) != design.n_situations:
                raise ValueError("draws were generated for a different set of situations")
        n_draws = draws.n_draws if n_random else 1
        cost = self.row_cost(n_draws, design.n_alternatives, design.n_columns, n_random)
        step = max(1, CHUNK_BUDGET // max(cost, 1))
        for start in range(0, design.n_situations, step):
            yield slice(start, min(start + step, design.n_situations))

    def _realized(self, design, beta, sd, draws, rows) -> Optional[np.ndarray]:
        if not design.random_columns:
            return None
        normals = draws.for_rows(rows)[:, :, : len(design.random_columns)]
        return beta[list(design.random_columns)] + np.abs(sd) * normals

    # -- evaluation ----------------------------------------------------------

    def evaluate(
        self, design: DesignMatrix, theta: np.ndarray, draws: Optional[DrawMatrix] = None,
        gradient: bool = True,
    ) -> LikelihoodResult:
        """Simulated log-likelihood sum over situations and its exact gradient."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (design.n_parameters,):
            raise ValueError(f"expected {design.n_parameters} parameters, got {theta.size}")
        if np.any(design.chosen < 0):
            raise ValueError("log-likelihood needs observed choices in every situation")
        beta, sd = design.split(theta)
        rc = list(design.random_columns)
        loglik = 0.0
        grad = np.zeros(design.n_parameters)
        n_clamped = 0
        for rows in self._blocks(design, draws):
            Z, avail, chosen = design.Z[rows], design.available[rows], design.chosen[rows]
            realized = self._realized(design, beta, sd, draws, rows)
            probs, score = self.kernel(Z, avail, chosen if gradient else None, beta, realized, design.random_columns)
            n = Z.shape[0]
            p_chosen = probs[np.arange(n), :, chosen]
            simulated = p_chosen.mean(axis=1)
            clamped = simulated < PROBABILITY_FLOOR
            n_clamped += int(clamped.sum())
            loglik += float(np.sum(np.log(np.maximum(simulated, PROBABILITY_FLOOR))))
            if not gradient:
                continue
            weights = p_chosen / (np.maximum(simulated, PROBABILITY_FLOOR)[:, None] * p_chosen.shape[1])
            weights[clamped] = 0.0
            grad[: design.n_columns] += np.einsum("nr,nrc->c", weights, score)
            if rc:
                normals = draws.for_rows(rows)[:, :, : len(rc)]
                grad[design.n_columns:] += np.einsum("nr,nrs,nrs->s", weights, score[:, :, rc], normals) * np.sign(sd)
        if n_clamped:
            logger.warning(f"{n_clamped} chosen probabilities underflowed and were clamped at {PROBABILITY_FLOOR}")
        names = tuple(self.spec.parameter_names)
        return LikelihoodResult(loglik=loglik, gradient=grad, names=names, n_clamped=n_clamped)

    def simulated_probabilities(
        self, design: DesignMatrix, theta: np.ndarray, draws: Optional[DrawMatrix] = None
    ) -> np.ndarray:
        """(N, J) probabilities averaged over draws; 0 for unavailable slots."""
        theta = np.asarray(theta, dtype=float)
        beta, sd = design.split(theta)
        out = np.zeros(design.available.shape)
        for rows in self._blocks(design, draws):
            realized = self._realized(design, beta, sd, draws, rows)
            probs, _ = self.kernel(design.Z[rows], design.available[rows], None, beta, realized, design.random_columns)
            out[rows] = probs.mean(axis=1)
        return out

    # -- dataset-level API ---------------------------------------------------

    def loglik(self, params, ds: ChoiceDataset, draws: Optional[DrawMatrix] = None) -> LikelihoodResult:
        return self.evaluate(self.design(ds), self._theta(params), draws)

    def probabilities(self, params, ds: ChoiceDataset, draws: Optional[DrawMatrix] = None) -> np.ndarray:
        return self.simulated_probabilities(self.design(ds), self._theta(params), draws)

    def objective(
        self, ds: ChoiceDataset, draws: Optional[DrawMatrix] = None
    ) -> Callable[[np.ndarray], Tuple[float, np.ndarray]]:
        """``theta -> (loglik, gradient)`` with the design array built once."""
        design = self.design(ds)

        def evaluate(theta: np.ndarray) -> Tuple[float, np.ndarray]:
            result = self.evaluate(design, theta, draws)
            return result.loglik, result.gradient

        return evaluate

    def situation_probabilities(self, params, situation: ChoiceSituation,
                                draws: Optional[DrawMatrix] = None) -> np.ndarray:
        """Probability vector over the alternatives of one situation."""
        ds = ChoiceDataset.from_situations(situation.schema, [situation])
        probs = self.probabilities(params, ds, draws)
        return probs[0, ds.present[0]]
