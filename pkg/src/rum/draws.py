#!/usr/bin/env python3
"""
Simulation draws for the mixing integral.

Halton columns use consecutive prime bases (2, 3, 5, ...), one per random
coefficient, with the first 10 points of every sequence discarded; uniforms
are mapped to standard normals by the inverse normal CDF.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd
from scipy.special import ndtri
from scipy.stats import qmc

from src.core.seeding import substream

logger = logging.getLogger(__name__)

HALTON_DISCARD = 10
DRAW_KINDS = ("halton", "pseudo-random")
DRAW_MAGIC = b"DRAW"
HEADER_DTYPE = np.dtype("<u4")


@dataclass(frozen=True, eq=False)
class DrawMatrix:
    """
    Standard-normal draws, ``draws[u, r, d]`` for decision unit ``u``.

    ``unit_index[n]`` maps situation ``n`` to its unit, so the situations of
    one respondent share a coefficient realization per draw.
    """
    draws: np.ndarray
    unit_index: np.ndarray
    kind: str = "halton"

    def __post_init__(self):
        draws = np.asarray(self.draws, dtype=float)
        if draws.ndim != 3:
            raise ValueError(f"draws must be (units, R, D), got shape {draws.shape}")
        if draws.shape[1] == 0:
            raise ValueError("at least one draw per unit is required (R = 0)")
        if not np.all(np.isfinite(draws)):
            raise ValueError("draws must be finite")
        unit_index = np.asarray(self.unit_index, dtype=np.int64)
        if unit_index.size and (unit_index.min() < 0 or unit_index.max() >= draws.shape[0]):
            raise ValueError("unit_index refers to a unit without draws")
        draws.setflags(write=False)
        unit_index.setflags(write=False)
        object.__setattr__(self, "draws", draws)
        object.__setattr__(self, "unit_index", unit_index)

    @property
    def n_draws(self) -> int:
        return self.draws.shape[1]

    @property
    def n_dims(self) -> int:
        return self.draws.shape[2]

    @property
    def n_units(self) -> int:
        return self.draws.shape[0]

    def for_rows(self, rows: Union[slice, np.ndarray]) -> np.ndarray:
        """(n, R, D) draws for the situations ``rows``."""
        return self.draws[self.unit_index[rows]]


def halton_normals(n_points: int, n_dims: int) -> np.ndarray:
    """(n_points, n_dims) standard normals from unscrambled Halton sequences."""
    sampler = qmc.Halton(d=n_dims, scramble=False)
    sampler.fast_forward(HALTON_DISCARD)
    return ndtri(sampler.random(n_points))


def decision_units(respondent_ids: np.ndarray, per: str = "respondent") -> np.ndarray:
    """Unit index per situation: by respondent, or one unit per situation."""
    ids = pd.Series(np.asarray(respondent_ids, dtype=object)).astype(str)
    if per == "situation" or (ids.str.strip() == "").all():
        return np.arange(len(ids))
    if per != "respondent":
        raise ValueError(f"draws must be per 'respondent' or 'situation', got '{per}'")
    codes, _ = pd.factorize(ids, sort=False)
    return codes


def make_draws(
    respondent_ids: np.ndarray,
    n_dims: int,
    n_draws: int = 500,
    kind: str = "halton",
    seed: int = None,
    per: str = "respondent",
) -> DrawMatrix:
    """
    Draws for a set of situations.

    Parameters:
    -----------
    respondent_ids : array
        Respondent of every situation (empty ids fall back to per situation).
    n_dims : int
        Number of random coefficients D.
    n_draws : int
        Draws per unit R.
    kind : str
        'halton' (deterministic) or 'pseudo-random' (needs ``seed``).
    seed : int
        Run seed; the 'draws' substream is used.
    per : str
        'respondent' or 'situation'.
    """
    if n_draws < 1:
        raise ValueError("at least one draw per unit is required (R = 0)")
    if kind not in DRAW_KINDS:
        raise ValueError(f"unknown draw kind '{kind}', expected one of {DRAW_KINDS}")
    unit_index = decision_units(respondent_ids, per=per)
    n_units = int(unit_index.max()) + 1 if unit_index.size else 0
    dims = max(n_dims, 1)
    if kind == "halton":
        values = halton_normals(n_units * n_draws, dims).reshape(n_units, n_draws, dims)
    else:
        values = substream(seed, "draws").standard_normal((n_units, n_draws, dims))
    logger.debug(f"Generated {kind} draws for {n_units} units, R={n_draws}, D={dims}")
    return DrawMatrix(draws=values[:, :, :n_dims], unit_index=unit_index, kind=kind)


def write_draws(draws: DrawMatrix, path: Union[str, Path]) -> Path:
    """
    Dump draws as a binary sidecar.

    Layout: 16-byte header (magic ``DRAW``, then R, D and the unit count as
    little-endian uint32), followed by the (units, R, D) array as row-major
    little-endian float64.
    """
    path = Path(path)
    header = np.array([draws.n_draws, draws.n_dims, draws.n_units], dtype=HEADER_DTYPE)
    with open(path, "wb") as handle:
        handle.write(DRAW_MAGIC)
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(draws.draws, dtype="<f8").tobytes())
    return path


def read_draws(path: Union[str, Path], unit_index: np.ndarray, kind: str = "halton") -> DrawMatrix:
    """Read a sidecar written by :func:`write_draws`."""
    raw = Path(path).read_bytes()
    if raw[:4] != DRAW_MAGIC:
        raise ValueError(f"{path} is not a draw file")
    r, d, u = np.frombuffer(raw[4:16], dtype=HEADER_DTYPE)
    values = np.frombuffer(raw[16:], dtype="<f8")
    if values.size != int(r) * int(d) * int(u):
        raise ValueError(f"{path} is truncated")
    return DrawMatrix(draws=values.reshape(int(u), int(r), int(d)).astype(float), unit_index=unit_index, kind=kind)
