#!/usr/bin/env python3
"""
Willingness-to-pay ratios and their simulated densities.

Two conventions are available. ``time_over_attribute`` divides the delivery
time coefficient by the attribute's coefficient; ``attribute_over_cost``
divides the attribute's coefficient by the shipping cost coefficient (a
value in dollars). When a coefficient in the ratio is random, the ratio's
distribution is simulated and written as a histogram.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.core.seeding import substream
from src.engine.results import EstimationResult

logger = logging.getLogger(__name__)

ZERO_DENOMINATOR = 1e-8
DENSITY_BINS = 100
DENSITY_RANGE = (0.5, 99.5)
MIN_DENSITY_DRAWS = 1000


class WtpConvention(str, Enum):
    TIME_OVER_ATTRIBUTE = "time_over_attribute"
    ATTRIBUTE_OVER_COST = "attribute_over_cost"


def wtp(numerator_coef: float, denominator_coef: float) -> float:
    """``|numerator / denominator|``."""
    if denominator_coef == 0:
        raise ValueError("willingness to pay is undefined for a zero denominator coefficient")
    return abs(numerator_coef / denominator_coef)


@dataclass
class WtpDensity:
    """Histogram of a simulated WTP ratio; ``masses`` sum to 1."""
    edges: np.ndarray
    masses: np.ndarray
    point_value: float
    median: float
    n_draws: int
    truncated_fraction: float = 0.0

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"bin_midpoint": self.midpoints, "mass": self.masses})

    def write(self, path: Union[str, Path], header_comment: Optional[str] = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as handle:
            if header_comment:
                handle.write(f"# {header_comment}\n")
            handle.write(f"# truncated_fraction={self.truncated_fraction:.6g} median={self.median:.6g}\n")
            self.to_frame().to_csv(handle, index=False, float_format="%.12g", lineterminator="\n")
        return path


def wtp_density(
    numerator: float,
    denominator_mean: float,
    denominator_sd: float,
    n_draws: int = 100000,
    seed: Optional[int] = None,
    numerator_sd: float = 0.0,
) -> WtpDensity:
    """
    Simulated distribution of ``|numerator / d|`` with ``d ~ Normal(mean, sd)``.

    Draws with ``|d| < 1e-8`` are discarded and their share reported as
    ``truncated_fraction``. The histogram has 100 equal-width bins over the
    0.5-99.5 percentile range of the kept ratios. With no spread on either
    side the result is a single bin holding all the mass. A random numerator
    (``numerator_sd > 0``) is drawn independently of the denominator.
    """
    if denominator_sd < 0 or numerator_sd < 0:
        raise ValueError("standard deviations must be nonnegative")
    if denominator_sd == 0 and numerator_sd == 0:
        value = wtp(numerator, denominator_mean)
        return WtpDensity(np.array([value, value]), np.array([1.0]), value, value, 1)
    if n_draws < MIN_DENSITY_DRAWS:
        raise ValueError(f"a WTP density needs at least {MIN_DENSITY_DRAWS} draws")

    rng = substream(seed, "wtp_density")
    denominators = rng.normal(denominator_mean, denominator_sd, size=n_draws)
    numerators = rng.normal(numerator, numerator_sd, size=n_draws) if numerator_sd > 0 else np.full(n_draws, numerator)
    keep = np.abs(denominators) >= ZERO_DENOMINATOR
    truncated = 1.0 - keep.mean()
    if truncated > 0:
        logger.warning(f"Discarded {truncated:.2%} of WTP draws with a near-zero denominator")
    ratios = np.abs(numerators[keep] / denominators[keep])
    if ratios.size == 0:
        raise ValueError("every WTP draw had a near-zero denominator")

    low, high = np.percentile(ratios, DENSITY_RANGE)
    if high > low:
        counts, edges = np.histogram(ratios, bins=DENSITY_BINS, range=(low, high))
    else:
        counts, edges = np.array([ratios.size]), np.array([low, high])
    masses = counts / counts.sum()
    return WtpDensity(
        edges=edges,
        masses=masses,
        point_value=wtp(numerator, denominator_mean) if denominator_mean != 0 else float("nan"),
        median=float(np.median(ratios)),
        n_draws=n_draws,
        truncated_fraction=float(truncated),
    )


@dataclass
class WtpEntry:
    coefficient: str
    value: float
    density: Optional[WtpDensity] = None


@dataclass
class WtpReport:
    """WTP of every requested coefficient of one estimated model."""
    model_kind: str
    convention: WtpConvention
    reference: str
    entries: List[WtpEntry] = field(default_factory=list)

    def values(self) -> dict:
        return {entry.coefficient: entry.value for entry in self.entries}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "attribute": [e.coefficient for e in self.entries],
                "wtp": [e.value for e in self.entries],
                "density_median": [e.density.median if e.density else np.nan for e in self.entries],
                "truncated_fraction": [e.density.truncated_fraction if e.density else np.nan for e in self.entries],
            }
        )


REFERENCES = {
    WtpConvention.TIME_OVER_ATTRIBUTE: "b_delivery_time",
    WtpConvention.ATTRIBUTE_OVER_COST: "b_shipping_cost",
}


def wtp_table(
    result: EstimationResult,
    coefficients: Optional[Sequence[str]] = None,
    convention: Union[WtpConvention, str] = WtpConvention.TIME_OVER_ATTRIBUTE,
    reference: Optional[str] = None,
    n_draws: int = 100000,
    seed: Optional[int] = None,
) -> WtpReport:
    """
    WTP of ``coefficients`` (default: every non-constant, non-spread one)
    against the ``reference`` coefficient under ``convention``.
    """
    convention = WtpConvention(convention)
    reference = reference or REFERENCES[convention]
    spec = result.spec
    if reference not in result.params:
        raise ValueError(f"reference coefficient '{reference}' is not in the model")
    sd_of = {rc.mean: rc.sd for rc in spec.random_coefficients}
    if coefficients is None:
        coefficients = [name for name in spec.column_names if not name.startswith("asc_")]
    report = WtpReport(model_kind=result.model_kind.value, convention=convention, reference=reference)
    for name in coefficients:
        if name == reference:
            continue
        if name not in result.params:
            raise ValueError(f"coefficient '{name}' is not in the model")
        if convention is WtpConvention.TIME_OVER_ATTRIBUTE:
            numerator, denominator = reference, name
        else:
            numerator, denominator = name, reference
        value = wtp(result.params[numerator], result.params[denominator])
        density = None
        num_sd = abs(result.params[sd_of[numerator]]) if numerator in sd_of else 0.0
        den_sd = abs(result.params[sd_of[denominator]]) if denominator in sd_of else 0.0
        if num_sd > 0 or den_sd > 0:
            density = wtp_density(result.params[numerator], result.params[denominator], den_sd,
                                  n_draws=n_draws, seed=seed, numerator_sd=num_sd)
        report.entries.append(WtpEntry(coefficient=name, value=value, density=density))
    logger.info(f"Computed {len(report.entries)} WTP values ({convention.value}, reference {reference})")
    return report
