#!/usr/bin/env python3
"""
Sampling choices from known parameters.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.choicedata.ingestion import write_csv
from src.choicedata.models import ChoiceDataset
from src.core.errors import ConfigError, UnsupportedModelError
from src.core.seeding import substream
from src.rrm.regret import RrmModel
from src.rum.draws import decision_units
from src.rum.logit import RumModel
from src.rum.spec import ModelKind, ModelSpec, ParameterVector, build_design

logger = logging.getLogger(__name__)

SIMULATION_BLOCK = 20000

DEFAULT_TRUTH = {
    "b_shipping_cost": -0.15,
    "sd_b_shipping_cost": 0.05,
    "b_delivery_time": -0.03,
    "b_reputation": 0.3,
    "b_reputation_med": 0.2,
    "b_reputation_high": 0.5,
    "b_tracking": 0.4,
    "b_e_notification": 0.3,
    "b_p_time_window": 0.25,
    "b_p_location_other": 0.1,
    "b_p_location_pickup": -0.1,
    "b_payment_cash": -0.2,
    "b_tip": -0.1,
    "b_full_time_cs": 0.2,
    "asc_1": 0.5,
    "asc_2": 0.4,
    "asc_3": 0.3,
}


def default_truth(spec: ModelSpec) -> ParameterVector:
    """Truth for ``spec`` taken from :data:`DEFAULT_TRUTH`; other names get 0."""
    return ParameterVector.from_mapping(
        spec, {k: v for k, v in DEFAULT_TRUTH.items() if k in spec.parameter_names}, default=0.0
    )


def simulate_choices(
    design: ChoiceDataset,
    spec: ModelSpec,
    truth: ParameterVector,
    kind: Union[ModelKind, str] = ModelKind.RUM,
    seed: Optional[int] = None,
) -> ChoiceDataset:
    """
    Sample one choice per situation from the model probabilities at ``truth``.

    Random coefficients get one realization per respondent, drawn from the
    'simulation' substream before the choice uniforms.

    Raises:
    -------
    UnsupportedModelError
        A regret model with random coefficients.
    """
    kind = ModelKind(kind)
    if kind is ModelKind.RRM and spec.has_random:
        raise UnsupportedModelError("simulating regret models with random coefficients is not supported")
    missing = [name for name in spec.parameter_names if name not in truth]
    if missing:
        raise ConfigError(f"truth has no value for {missing}")
    theta = np.array([truth[name] for name in spec.parameter_names])
    model = RumModel(spec) if kind is ModelKind.RUM else RrmModel(spec)
    matrix = build_design(spec, design)
    beta, sd = matrix.split(theta)
    rc = matrix.random_columns

    rng = substream(seed, "simulation")
    realized = None
    if rc:
        units = decision_units(design.respondent_ids)
        normals = rng.standard_normal((int(units.max()) + 1, len(rc)))
        realized = beta[list(rc)] + np.abs(sd) * normals[units]
    uniforms = rng.random(len(design))

    n, j = matrix.available.shape
    chosen = np.empty(n, dtype=np.int64)
    for start in range(0, n, SIMULATION_BLOCK):
        rows = slice(start, min(start + SIMULATION_BLOCK, n))
        block = None if realized is None else realized[rows][:, None, :]
        probs, _ = model.kernel(matrix.Z[rows], matrix.available[rows], None, beta, block, rc)
        cumulative = np.cumsum(probs[:, 0, :], axis=1)
        picks = np.minimum((cumulative <= uniforms[rows, None]).sum(axis=1), j - 1)
        avail = matrix.available[rows]
        # rounding can leave the pick on a trailing unavailable slot
        last_available = j - 1 - np.argmax(avail[:, ::-1], axis=1)
        chosen[rows] = np.where(avail[np.arange(len(picks)), picks], picks, last_available)

    shares = np.bincount(chosen, minlength=j) / n
    logger.info(f"Simulated {n} {kind.value} choices; shares by slot: {np.round(shares, 4).tolist()}")
    return design.with_choices(chosen)


def truth_metadata(
    spec: ModelSpec,
    truth: ParameterVector,
    kind: Union[ModelKind, str],
    seed: Optional[int],
    ds: ChoiceDataset,
    extra: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Contents of the ``<dataset>.truth.json`` sidecar."""
    metadata = {
        "model_kind": ModelKind(kind).value,
        "seed": seed,
        "truth": truth.as_dict(),
        "spec": spec.model_dump(mode="json"),
        "schema": ds.schema.model_dump(mode="json"),
        "n_situations": len(ds),
        "n_alternatives": ds.n_alternatives,
    }
    metadata.update(extra or {})
    return metadata


def truth_path(dataset_path: Union[str, Path]) -> Path:
    path = Path(dataset_path)
    return path.with_name(path.stem + ".truth.json")


def write_simulation(
    ds: ChoiceDataset,
    path: Union[str, Path],
    metadata: Dict[str, Any],
    header_comment: Optional[str] = None,
) -> Dict[str, Path]:
    """Write the dataset CSV and its truth sidecar next to it."""
    csv_path = write_csv(ds, path, header_comment=header_comment)
    sidecar = truth_path(csv_path)
    sidecar.write_text(json.dumps(metadata, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info(f"Wrote truth sidecar {sidecar}")
    return {"dataset": csv_path, "truth": sidecar}


def read_truth(dataset_path: Union[str, Path]) -> Dict[str, Any]:
    """Load the sidecar written by :func:`write_simulation`."""
    sidecar = truth_path(dataset_path)
    if not sidecar.exists():
        raise FileNotFoundError(f"truth sidecar not found: {sidecar}")
    return json.loads(sidecar.read_text(encoding="utf-8"))
