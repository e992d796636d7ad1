#!/usr/bin/env python3
"""
Direct point elasticities of choice probabilities.

For alternative ``i`` and attribute ``k`` the sample elasticity is the
probability-weighted average over situations of
``(x_ik / P_i) * dP_i/dx_ik``, with the derivative taken by central
differences. Situations where ``x_ik`` is zero or ``i`` is unavailable are
left out and counted.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.choicedata.models import ChoiceDataset
from src.core.errors import UnsupportedModelError
from src.rum.draws import DrawMatrix
from src.rum.simulation import ChoiceModel
from src.rum.spec import ParameterVector, build_design
from .tables import write_table

logger = logging.getLogger(__name__)

RELATIVE_STEP = 1e-4
AGGREGATION = "probability-weighted sample enumeration"


def _evaluation_points(ds: ChoiceDataset, attribute: str, slot: int) -> Tuple[np.ndarray, np.ndarray]:
    if not 0 <= slot < ds.n_alternatives:
        raise IndexError(f"alternative slot {slot} is out of range")
    x = ds.attribute(attribute)[:, slot]
    usable = ds.available[:, slot] & (x != 0)
    return x, usable


def elasticity_with_diagnostics(
    model: ChoiceModel,
    params: ParameterVector,
    ds: ChoiceDataset,
    attribute: str,
    slot: int,
    draws: Optional[DrawMatrix] = None,
    step: float = RELATIVE_STEP,
) -> Tuple[float, int]:
    """Elasticity and the number of situations skipped for a zero attribute."""
    x, usable = _evaluation_points(ds, attribute, slot)
    n_zero = int(np.sum(ds.available[:, slot] & (x == 0)))
    if not usable.any():
        raise ValueError(f"elasticity undefined at zero attribute: '{attribute}' is 0 for every situation")
    h = step * np.abs(x)
    up = ds.with_attribute(attribute, slot, x + h)
    down = ds.with_attribute(attribute, slot, x - h)
    base = model.probabilities(params, ds, draws)[:, slot]
    slope = (model.probabilities(params, up, draws)[:, slot]
             - model.probabilities(params, down, draws)[:, slot]) / np.where(usable, 2.0 * h, 1.0)
    # sum_n P_n * (x_n / P_n) * dP_n / sum_n P_n
    value = float(np.sum((x * slope)[usable]) / np.sum(base[usable]))
    if n_zero:
        logger.warning(f"Elasticity of '{attribute}' for slot {slot}: skipped {n_zero} situations with a zero value")
    return value, n_zero


def direct_elasticity(
    model: ChoiceModel,
    params: ParameterVector,
    ds: ChoiceDataset,
    attribute: str,
    slot: int,
    draws: Optional[DrawMatrix] = None,
) -> float:
    """Sample direct elasticity of alternative ``slot`` to its own ``attribute``."""
    return elasticity_with_diagnostics(model, params, ds, attribute, slot, draws)[0]


def mnl_elasticity(model: ChoiceModel, params: ParameterVector, ds: ChoiceDataset, attribute: str, slot: int) -> float:
    """Closed form ``beta_k * x_ik * (1 - P_i)`` aggregated like :func:`direct_elasticity`."""
    if model.spec.has_random:
        raise UnsupportedModelError("the closed-form elasticity needs fixed coefficients")
    x, usable = _evaluation_points(ds, attribute, slot)
    if not usable.any():
        raise ValueError(f"elasticity undefined at zero attribute: '{attribute}' is 0 for every situation")
    theta = params.values
    shifted = ds.with_attribute(attribute, slot, x + 1.0)
    # utility is linear in x, so a unit shift of the design gives dV/dx
    marginal = (build_design(model.spec, shifted).Z[:, slot] - build_design(model.spec, ds).Z[:, slot]) @ theta
    P = model.probabilities(params, ds)[:, slot]
    point = marginal * x * (1.0 - P)
    return float(np.sum((P * point)[usable]) / np.sum(P[usable]))


@dataclass
class ElasticityEntry:
    attribute: str
    alternative: str
    slot: int
    value: Optional[float]
    zero_points: int = 0

    @property
    def flagged(self) -> bool:
        return self.value is None or self.zero_points > 0


@dataclass
class ElasticityTable:
    """Direct elasticities of one model for (attribute, alternative) pairs."""
    model_kind: str
    entries: List[ElasticityEntry] = field(default_factory=list)
    method: str = AGGREGATION

    def get(self, attribute: str, alternative: str) -> Optional[float]:
        for entry in self.entries:
            if entry.attribute == attribute and entry.alternative == alternative:
                return entry.value
        raise KeyError((attribute, alternative))

    @property
    def attributes(self) -> List[str]:
        return list(dict.fromkeys(e.attribute for e in self.entries))

    @property
    def alternatives(self) -> List[str]:
        return list(dict.fromkeys(e.alternative for e in self.entries))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "attribute": [e.attribute for e in self.entries],
                "alternative": [e.alternative for e in self.entries],
                "elasticity": [np.nan if e.value is None else e.value for e in self.entries],
                "zero_points": [e.zero_points for e in self.entries],
                "flagged": [int(e.flagged) for e in self.entries],
            }
        )

    def write(self, path: Union[str, Path], header_comment: Optional[str] = None) -> Path:
        return write_table(self.to_frame(), path, header_comment, note=f"model={self.model_kind} method={self.method}")


def alternative_labels(ds: ChoiceDataset) -> List[str]:
    """Label of every slot: its first nonempty alternative id."""
    labels = []
    for slot in range(ds.n_alternatives):
        ids = [a for a in ds.alt_ids[:, slot] if a]
        labels.append(str(ids[0]) if ids else f"slot{slot + 1}")
    return labels


def elasticity_table(
    model: ChoiceModel,
    params: ParameterVector,
    ds: ChoiceDataset,
    attributes: Optional[Sequence[str]] = None,
    slots: Optional[Sequence[int]] = None,
    draws: Optional[DrawMatrix] = None,
) -> ElasticityTable:
    """
    Elasticities for every (attribute, alternative) pair; pairs where the
    attribute is zero everywhere get no value and are flagged.
    """
    attributes = list(attributes) if attributes is not None else list(dict.fromkeys(model.spec.referenced_attributes()))
    slots = list(slots) if slots is not None else list(range(ds.n_alternatives))
    labels = alternative_labels(ds)
    table = ElasticityTable(model_kind=model.kind.value)
    for attribute in attributes:
        for slot in slots:
            try:
                value, zeros = elasticity_with_diagnostics(model, params, ds, attribute, slot, draws)
            except ValueError as exc:
                logger.warning(str(exc))
                value, zeros = None, int(ds.available[:, slot].sum())
            table.entries.append(ElasticityEntry(attribute, labels[slot], slot, value, zeros))
    logger.info(f"Computed {len(table.entries)} {table.model_kind} elasticities")
    return table
