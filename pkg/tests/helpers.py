"""Builders for small hand-made datasets and specs."""

from typing import Optional, Sequence

import numpy as np

from src.choicedata.models import AttributeKind, AttributeSchema, ChoiceDataset
from src.rum.spec import ModelSpec, ParameterVector, RandomCoefficient, Term


def make_dataset(
    attributes,
    chosen: Optional[Sequence[int]] = None,
    available=None,
    names: Sequence[str] = ("cost",),
    respondents: Optional[Sequence[str]] = None,
    covariates=None,
    covariate_names: Sequence[str] = (),
) -> ChoiceDataset:
    """Dataset from an (N, J) or (N, J, K) attribute array; every slot is present."""
    attributes = np.asarray(attributes, dtype=float)
    if attributes.ndim == 2:
        attributes = attributes[:, :, None]
    n, j, k = attributes.shape
    schema = AttributeSchema(
        attribute_names=list(names),
        attribute_kinds=[AttributeKind.CONTINUOUS] * k,
        covariate_names=list(covariate_names),
    )
    return ChoiceDataset(
        schema=schema,
        situation_ids=np.array([f"s{i}" for i in range(n)], dtype=object),
        respondent_ids=np.array(respondents if respondents is not None else [f"r{i}" for i in range(n)], dtype=object),
        alt_ids=np.tile(np.array([f"A{s + 1}" for s in range(j)], dtype=object), (n, 1)),
        attributes=attributes,
        available=np.ones((n, j), dtype=bool) if available is None else np.asarray(available, dtype=bool),
        present=np.ones((n, j), dtype=bool),
        chosen=np.full(n, -1) if chosen is None else np.asarray(chosen),
        covariates=np.zeros((n, 0)) if covariates is None else np.asarray(covariates, dtype=float),
    )


def linear_spec(names: Sequence[str] = ("cost",), n_constants: int = 0, random: Sequence[str] = ()) -> ModelSpec:
    """Generic terms ``b_<name>``; constants on every slot but the last."""
    constants = tuple(k != n_constants - 1 for k in range(n_constants)) if n_constants else ()
    return ModelSpec(
        terms=tuple(Term.parse(name) for name in names),
        constants=constants,
        reference_alternative=max(n_constants - 1, 0),
        random_coefficients=tuple(RandomCoefficient(coefficient=f"b_{name}") for name in random),
    )


def params_for(spec: ModelSpec, **values: float) -> ParameterVector:
    """Parameters of ``spec``; names not given are 0."""
    return ParameterVector.from_mapping(spec, values, default=0.0)


def central_difference(func, theta: np.ndarray, rel_step: float = 1e-5) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    for i in range(theta.size):
        h = rel_step * max(1.0, abs(theta[i]))
        up, down = theta.copy(), theta.copy()
        up[i] += h
        down[i] -= h
        out[i] = (func(up) - func(down)) / (2.0 * h)
    return out
