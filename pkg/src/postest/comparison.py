#!/usr/bin/env python3
"""
Side-by-side comparison of regret and utility models.

WTP tables carry a ``Ratio`` column (RRM over RUM); elasticity tables carry,
per alternative, the RUM and RRM values and their percent difference
relative to the RRM value.
"""

import logging
from typing import Dict, List

import numpy as np
import pandas as pd

from src.core.errors import ConfigError
from .elasticity import ElasticityTable
from .wtp import WtpReport

logger = logging.getLogger(__name__)


def model_ratio(rrm_value: float, rum_value: float) -> float:
    """``rrm / rum``."""
    if rum_value == 0:
        raise ValueError("model ratio is undefined for a zero RUM value")
    return rrm_value / rum_value


def percent_difference(a_rrm: float, a_rum: float) -> float:
    """``(a_rrm - a_rum) / a_rrm * 100``, signed."""
    if a_rrm == 0:
        raise ValueError("percent difference is undefined for a zero RRM value")
    return (a_rrm - a_rum) / a_rrm * 100.0


def _safe(func, a, b) -> float:
    if a is None or b is None or not (np.isfinite(a) and np.isfinite(b)):
        return np.nan
    try:
        return func(a, b)
    except ValueError:
        return np.nan


def _check_aligned(rum: List[str], rrm: List[str], what: str) -> None:
    if rum != rrm:
        only_rum = sorted(set(rum) - set(rrm))
        only_rrm = sorted(set(rrm) - set(rum))
        raise ConfigError(
            f"{what} do not match between models: only in RUM {only_rum}, only in RRM {only_rrm}"
        )


def compare_wtp(rum: WtpReport, rrm: WtpReport) -> pd.DataFrame:
    """WTP comparison: attribute, RUM, RRM, Ratio."""
    if rum.convention != rrm.convention or rum.reference != rrm.reference:
        raise ConfigError("WTP reports use different conventions")
    rum_values, rrm_values = rum.values(), rrm.values()
    _check_aligned(sorted(rum_values), sorted(rrm_values), "WTP coefficient names")
    names = list(rum_values)
    return pd.DataFrame(
        {
            "attribute": names,
            "RUM": [rum_values[n] for n in names],
            "RRM": [rrm_values[n] for n in names],
            "Ratio": [_safe(model_ratio, rrm_values[n], rum_values[n]) for n in names],
        }
    )


def compare_elasticities(rum: ElasticityTable, rrm: ElasticityTable) -> pd.DataFrame:
    """
    Elasticity comparison, one row per attribute and for every alternative
    the columns ``<alt>_RUM``, ``<alt>_RRM`` and ``<alt>_%``.
    """
    _check_aligned(rum.attributes, rrm.attributes, "elasticity attributes")
    _check_aligned(rum.alternatives, rrm.alternatives, "elasticity alternatives")
    columns: Dict[str, list] = {"attribute": rum.attributes}
    for alt in rum.alternatives:
        a_rum = [rum.get(attr, alt) for attr in rum.attributes]
        a_rrm = [rrm.get(attr, alt) for attr in rum.attributes]
        columns[f"{alt}_RUM"] = [np.nan if v is None else v for v in a_rum]
        columns[f"{alt}_RRM"] = [np.nan if v is None else v for v in a_rrm]
        columns[f"{alt}_%"] = [_safe(percent_difference, b, a) for a, b in zip(a_rum, a_rrm)]
    return pd.DataFrame(columns)
