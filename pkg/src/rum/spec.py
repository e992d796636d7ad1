#!/usr/bin/env python3
"""
Model specifications, parameter vectors and the design array.

A :class:`ModelSpec` lists linear terms; every term (and every
alternative-specific constant) becomes one column of the design array
``Z[n, j, c]``. Utility models take ``V = Z @ beta``; regret models compare
the same columns pairwise, so both families share one coefficient naming.
"""

import hashlib
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.choicedata.models import AttributeSchema, ChoiceDataset
from src.core.errors import ConfigError, SchemaError

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    RUM = "RUM"
    RRM = "RRM"

    @classmethod
    def _missing_(cls, value):
        if isinstance(value, str):
            for member in cls:
                if member.value == value.upper():
                    return member
        return None


class Term(BaseModel):
    """
    One linear term.

    The column value for alternative slot ``j`` is the attribute value (or 1)
    times the covariate value (or 1), restricted to the listed slots
    (0-based; ``None`` means every alternative).
    """
    model_config = ConfigDict(frozen=True)

    name: str
    attribute: Optional[str] = None
    covariate: Optional[str] = None
    alternatives: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def _check(self) -> "Term":
        if self.attribute is None and self.covariate is None:
            raise ValueError(f"term '{self.name}' needs an attribute or a covariate")
        if self.attribute is None and self.alternatives is None:
            raise ValueError(
                f"covariate-only term '{self.name}' must be restricted to some alternatives"
            )
        return self

    @classmethod
    def parse(cls, entry) -> "Term":
        """Accept ``"cost"``, ``"cost*income"`` or a mapping."""
        if isinstance(entry, str):
            attribute, _, covariate = entry.partition("*")
            name = f"b_{attribute}" + (f"_{covariate}" if covariate else "")
            return cls(name=name, attribute=attribute.strip(), covariate=covariate.strip() or None)
        entry = dict(entry)
        if "alternatives" in entry and entry["alternatives"] is not None:
            entry["alternatives"] = tuple(int(a) for a in entry["alternatives"])
        if "name" not in entry:
            entry["name"] = "b_" + "_".join(
                str(entry[k]) for k in ("attribute", "covariate") if entry.get(k)
            )
        return cls(**entry)


class RandomCoefficient(BaseModel):
    """A normally distributed coefficient ``mean + sd * draw``."""
    model_config = ConfigDict(frozen=True)

    coefficient: str
    distribution: str = "normal"
    mean_name: Optional[str] = None
    sd_name: Optional[str] = None

    @field_validator("distribution")
    @classmethod
    def _normal_only(cls, value: str) -> str:
        if value.lower() != "normal":
            raise ValueError(f"unsupported mixing distribution '{value}' (only 'normal')")
        return "normal"

    @property
    def mean(self) -> str:
        return self.mean_name or self.coefficient

    @property
    def sd(self) -> str:
        return self.sd_name or f"sd_{self.coefficient}"


class ModelSpec(BaseModel):
    """
    Declarative specification of utility/regret terms.

    ``constants`` flags, per alternative slot, whether it gets an
    alternative-specific constant; the ``reference_alternative`` slot is the
    normalized one and may not be flagged.
    """
    model_config = ConfigDict(frozen=True)

    terms: Tuple[Term, ...]
    constants: Tuple[bool, ...] = ()
    reference_alternative: int = 0
    random_coefficients: Tuple[RandomCoefficient, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "ModelSpec":
        if not self.terms and not any(self.constants):
            raise ValueError("model has no terms")
        if self.constants:
            if not 0 <= self.reference_alternative < len(self.constants):
                raise ValueError("reference_alternative must index one of the constant flags")
            if self.constants[self.reference_alternative]:
                raise ValueError("the reference alternative cannot carry a constant")
        term_names = [t.name for t in self.terms]
        for rc in self.random_coefficients:
            if rc.coefficient not in term_names:
                raise ValueError(f"random coefficient '{rc.coefficient}' is not a term")
        if len({rc.coefficient for rc in self.random_coefficients}) != len(self.random_coefficients):
            raise ValueError("a coefficient is declared random twice")
        names = self.parameter_names
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"coefficient names are not unique: {dupes}")
        return self

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "ModelSpec":
        """Build from the ``model`` section of a run file."""
        constants = mapping.get("constants", ())
        if isinstance(constants, int) and not isinstance(constants, bool):
            reference = int(mapping.get("reference_alternative", 0))
            constants = tuple(j != reference for j in range(constants))
        random = []
        for entry in mapping.get("random_coefficients", ()) or ():
            random.append(RandomCoefficient(coefficient=entry) if isinstance(entry, str) else RandomCoefficient(**entry))
        return cls(
            terms=tuple(Term.parse(t) for t in mapping.get("terms", ()) or ()),
            constants=tuple(bool(c) for c in constants or ()),
            reference_alternative=int(mapping.get("reference_alternative", 0)),
            random_coefficients=tuple(random),
        )

    # -- naming --------------------------------------------------------------

    @property
    def constant_slots(self) -> List[int]:
        return [j for j, flag in enumerate(self.constants) if flag]

    @property
    def column_names(self) -> List[str]:
        """Coefficient of each design column; random ones by their mean name."""
        means = {rc.coefficient: rc.mean for rc in self.random_coefficients}
        names = [means.get(t.name, t.name) for t in self.terms]
        return names + [f"asc_{j + 1}" for j in self.constant_slots]

    @property
    def sd_names(self) -> List[str]:
        return [rc.sd for rc in self.random_coefficients]

    @property
    def parameter_names(self) -> List[str]:
        """Canonical order: term coefficients, constants, then spreads."""
        return self.column_names + self.sd_names

    @property
    def random_columns(self) -> List[int]:
        index = {t.name: c for c, t in enumerate(self.terms)}
        return [index[rc.coefficient] for rc in self.random_coefficients]

    @property
    def has_random(self) -> bool:
        return bool(self.random_coefficients)

    @property
    def n_parameters(self) -> int:
        return len(self.parameter_names)

    def referenced_attributes(self) -> List[str]:
        return [t.attribute for t in self.terms if t.attribute is not None]

    def referenced_covariates(self) -> List[str]:
        return [t.covariate for t in self.terms if t.covariate is not None]

    def check_schema(self, schema: AttributeSchema) -> None:
        """Raise :class:`ConfigError` naming the first unknown attribute or covariate."""
        for name in self.referenced_attributes():
            if name not in schema.attribute_names:
                raise ConfigError(f"model refers to unknown attribute '{name}'")
        for name in self.referenced_covariates():
            if name not in schema.covariate_names:
                raise ConfigError(f"model refers to unknown covariate '{name}'")

    def spec_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """Named coefficient values in the canonical order of a spec."""
    names: Tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if len(values) != len(self.names):
            raise ValueError(f"{len(values)} values for {len(self.names)} parameter names")
        values.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, spec: ModelSpec) -> "ParameterVector":
        return cls(tuple(spec.parameter_names), np.zeros(spec.n_parameters))

    @classmethod
    def from_mapping(
        cls, spec: ModelSpec, mapping: Mapping[str, float], default: Optional[float] = None
    ) -> "ParameterVector":
        """Order ``mapping`` canonically; missing names use ``default`` or raise."""
        unknown = set(mapping) - set(spec.parameter_names)
        if unknown:
            raise ConfigError(f"unknown parameter(s) {sorted(unknown)}")
        values = []
        for name in spec.parameter_names:
            if name in mapping:
                values.append(float(mapping[name]))
            elif default is not None:
                values.append(float(default))
            else:
                raise ConfigError(f"no value given for parameter '{name}'")
        return cls(tuple(spec.parameter_names), np.array(values))

    def __getitem__(self, name: str) -> float:
        try:
            return float(self.values[self.names.index(name)])
        except ValueError:
            raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return name in self.names

    def __len__(self) -> int:
        return len(self.names)

    def as_dict(self) -> Dict[str, float]:
        return {name: float(v) for name, v in zip(self.names, self.values)}

    def with_values(self, values: Sequence[float]) -> "ParameterVector":
        return ParameterVector(self.names, np.asarray(values, dtype=float))

    def updated(self, **changes: float) -> "ParameterVector":
        mapping = self.as_dict()
        for name, value in changes.items():
            if name not in mapping:
                raise KeyError(name)
            mapping[name] = value
        return ParameterVector(self.names, np.array(list(mapping.values())))

    def reported(self, spec: ModelSpec) -> "ParameterVector":
        """Spreads as absolute values; the likelihood only depends on |sd|."""
        values = np.array(self.values, copy=True)
        for name in spec.sd_names:
            i = self.names.index(name)
            values[i] = abs(values[i])
        return ParameterVector(self.names, values)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ParameterVector)
            and self.names == other.names
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    """
    Numeric form of (spec, dataset) used by every likelihood.

    ``Z`` is (N, J, C) with one column per coefficient in
    ``spec.column_names``; ``random_columns`` index the columns whose
    coefficient is drawn per decision maker.
    """
    Z: np.ndarray
    available: np.ndarray
    chosen: np.ndarray
    column_names: Tuple[str, ...]
    random_columns: Tuple[int, ...]
    n_sd: int

    @property
    def n_situations(self) -> int:
        return self.Z.shape[0]

    @property
    def n_alternatives(self) -> int:
        return self.Z.shape[1]

    @property
    def n_columns(self) -> int:
        return self.Z.shape[2]

    @property
    def n_parameters(self) -> int:
        return self.n_columns + self.n_sd

    def split(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Column coefficients (means for random columns) and raw spreads."""
        theta = np.asarray(theta, dtype=float)
        return theta[: self.n_columns], theta[self.n_columns:]


def term_column(term: Term, ds: ChoiceDataset) -> np.ndarray:
    """(N, J) values of one term."""
    n, j = len(ds), ds.n_alternatives
    column = np.ones((n, j))
    if term.attribute is not None:
        column = column * ds.attribute(term.attribute)
    if term.covariate is not None:
        column = column * ds.covariate(term.covariate)[:, None]
    if term.alternatives is not None:
        mask = np.zeros(j, dtype=bool)
        slots = [a for a in term.alternatives if 0 <= a < j]
        mask[slots] = True
        column = column * mask[None, :]
    return column


def build_design(spec: ModelSpec, ds: ChoiceDataset) -> DesignMatrix:
    """Assemble the design array for ``spec`` over ``ds``."""
    try:
        spec.check_schema(ds.schema)
    except ConfigError as exc:
        raise SchemaError(str(exc))
    n, j = len(ds), ds.n_alternatives
    if spec.constants and len(spec.constants) > j:
        raise SchemaError(f"model declares constants for {len(spec.constants)} alternatives, data has {j}")
    columns = [term_column(term, ds) for term in spec.terms]
    for slot in spec.constant_slots:
        indicator = np.zeros((n, j))
        indicator[:, slot] = 1.0
        columns.append(indicator)
    # unavailable and padding slots carry zeros whatever their attribute values
    Z = np.where(ds.available[:, :, None], np.stack(columns, axis=-1), 0.0)
    return DesignMatrix(
        Z=Z,
        available=ds.available,
        chosen=ds.chosen,
        column_names=tuple(spec.column_names),
        random_columns=tuple(spec.random_columns),
        n_sd=len(spec.random_coefficients),
    )
