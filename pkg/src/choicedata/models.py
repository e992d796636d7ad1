#!/usr/bin/env python3
"""
Data models for stated-preference choice data.

The attribute schema is a pydantic model (it is declared in YAML run files);
the dataset itself is an immutable bundle of numpy arrays so that likelihood
code can work on whole-sample arrays. Situations with fewer alternatives than
the widest one are padded with slots that are neither present nor available.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from src.core.errors import SchemaError

RESERVED_COLUMNS = ("situation_id", "respondent_id", "alt_id", "chosen", "available")
# optional situation-level label (product category) used to run models per segment
SEGMENT_COLUMN = "product"


class AttributeKind(str, Enum):
    """How an attribute is measured."""
    CONTINUOUS = "continuous"
    BINARY = "binary"
    CATEGORICAL = "categorical"


class AttributeSchema(BaseModel):
    """
    Declaration of the K alternative attributes and the case-level covariates.

    ``levels`` lists the admissible codes of categorical attributes, ``bounds``
    an optional closed range for continuous ones.
    """
    model_config = ConfigDict(frozen=True)

    attribute_names: List[str]
    attribute_kinds: List[AttributeKind]
    levels: Dict[str, List[float]] = {}
    bounds: Dict[str, Tuple[float, float]] = {}
    covariate_names: List[str] = []

    @field_validator("attribute_names")
    @classmethod
    def _names_unique(cls, names: List[str]) -> List[str]:
        if not names:
            raise ValueError("schema declares no attributes")
        if any(not name for name in names):
            raise ValueError("attribute names must be nonempty")
        if len(set(names)) != len(names):
            raise ValueError(f"attribute names are not unique: {names}")
        return names

    @model_validator(mode="after")
    def _check_consistency(self) -> "AttributeSchema":
        if len(self.attribute_kinds) != len(self.attribute_names):
            raise ValueError("attribute_kinds must have one entry per attribute")
        for name, kind in zip(self.attribute_names, self.attribute_kinds):
            if kind == AttributeKind.CATEGORICAL and len(self.levels.get(name, [])) < 2:
                raise ValueError(f"categorical attribute '{name}' must declare at least 2 levels")
        for name in list(self.levels) + list(self.bounds):
            if name not in self.attribute_names:
                raise ValueError(f"levels/bounds given for unknown attribute '{name}'")
        reserved = set(RESERVED_COLUMNS) | {SEGMENT_COLUMN}
        clash = set(self.covariate_names) & (set(self.attribute_names) | reserved)
        if clash or len(set(self.covariate_names)) != len(self.covariate_names):
            raise ValueError(f"covariate names clash or repeat: {sorted(clash) or self.covariate_names}")
        if set(self.attribute_names) & reserved:
            raise ValueError("attribute names may not reuse reserved column names")
        return self

    @classmethod
    def from_mapping(cls, mapping: Dict) -> "AttributeSchema":
        """
        Build a schema from the YAML form used in run files::

            attributes:
              - {name: shipping_cost, kind: continuous, bounds: [14, 26]}
              - {name: reputation, kind: categorical, levels: [0, 1, 2]}
            covariates: [income]
        """
        try:
            attributes = mapping["attributes"]
        except (KeyError, TypeError):
            raise SchemaError("schema declaration needs an 'attributes' list")
        names, kinds, levels, bounds = [], [], {}, {}
        for entry in attributes:
            if isinstance(entry, str):
                entry = {"name": entry}
            names.append(entry["name"])
            kinds.append(AttributeKind(entry.get("kind", "continuous")))
            if "levels" in entry:
                levels[entry["name"]] = [float(v) for v in entry["levels"]]
            if "bounds" in entry:
                lo, hi = entry["bounds"]
                bounds[entry["name"]] = (float(lo), float(hi))
        return cls(
            attribute_names=names,
            attribute_kinds=kinds,
            levels=levels,
            bounds=bounds,
            covariate_names=list(mapping.get("covariates", []) or []),
        )

    @property
    def n_attributes(self) -> int:
        return len(self.attribute_names)

    @property
    def n_covariates(self) -> int:
        return len(self.covariate_names)

    def attribute_index(self, name: str) -> int:
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise SchemaError(f"unknown attribute '{name}'", column=name)

    def covariate_index(self, name: str) -> int:
        try:
            return self.covariate_names.index(name)
        except ValueError:
            raise SchemaError(f"unknown covariate '{name}'", column=name)

    def kind(self, name: str) -> AttributeKind:
        return self.attribute_kinds[self.attribute_index(name)]


@dataclass(frozen=True)
class AlternativeRecord:
    """One alternative of a choice situation."""
    alt_id: str
    attributes: Tuple[float, ...]
    available: bool = True


@dataclass(frozen=True)
class ChoiceSituation:
    """One decision task: the offered alternatives and the observed choice."""
    situation_id: str
    respondent_id: str
    alternatives: Tuple[AlternativeRecord, ...]
    chosen: Optional[str]
    covariates: Tuple[float, ...]
    schema: AttributeSchema = field(compare=False, repr=False)
    segment: str = ""

    @property
    def alt_ids(self) -> List[str]:
        return [alt.alt_id for alt in self.alternatives]

    @property
    def chosen_index(self) -> Optional[int]:
        if self.chosen is None:
            return None
        return self.alt_ids.index(self.chosen)


def _readonly(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ChoiceDataset:
    """
    Long-format panel of choice situations held as aligned arrays.

    Shapes: ``attributes`` (N, J, K); ``available`` and ``present`` (N, J);
    ``alt_ids`` (N, J) with "" in padding slots; ``chosen`` (N,) holding the
    slot index of the chosen alternative or -1 when choices are not yet
    simulated; ``covariates`` (N, C); ``segments`` (N,) with "" for
    situations outside any segment.
    """
    schema: AttributeSchema
    situation_ids: np.ndarray
    respondent_ids: np.ndarray
    alt_ids: np.ndarray
    attributes: np.ndarray
    available: np.ndarray
    present: np.ndarray
    chosen: np.ndarray
    covariates: np.ndarray
    segments: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.situation_ids)
        if n == 0:
            raise SchemaError("a choice dataset needs at least one situation")
        segments = np.full(n, "", dtype=object) if self.segments is None else self.segments
        arrays = {
            "segments": _readonly(np.asarray(segments, dtype=object)),
            "situation_ids": _readonly(np.asarray(self.situation_ids, dtype=object)),
            "respondent_ids": _readonly(np.asarray(self.respondent_ids, dtype=object)),
            "alt_ids": _readonly(np.asarray(self.alt_ids, dtype=object)),
            "attributes": _readonly(np.asarray(self.attributes, dtype=float)),
            "available": _readonly(np.asarray(self.available, dtype=bool)),
            "present": _readonly(np.asarray(self.present, dtype=bool)),
            "chosen": _readonly(np.asarray(self.chosen, dtype=np.int64)),
            "covariates": _readonly(np.asarray(self.covariates, dtype=float).reshape(n, -1)),
        }
        for name, value in arrays.items():
            object.__setattr__(self, name, value)
        j = self.alt_ids.shape[1]
        expected = {
            "respondent_ids": (n,),
            "alt_ids": (n, j),
            "attributes": (n, j, self.schema.n_attributes),
            "available": (n, j),
            "present": (n, j),
            "chosen": (n,),
            "covariates": (n, self.schema.n_covariates),
            "segments": (n,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise SchemaError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if np.any(self.available & ~self.present):
            raise SchemaError("padding slots cannot be available")

    # -- sizes ---------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.situation_ids)

    @property
    def n_situations(self) -> int:
        return len(self)

    @property
    def n_alternatives(self) -> int:
        """Width J of the padded alternative axis."""
        return self.alt_ids.shape[1]

    @property
    def n_available(self) -> np.ndarray:
        return self.available.sum(axis=1)

    @property
    def has_choices(self) -> bool:
        return bool(np.all(self.chosen >= 0))

    # -- column access -------------------------------------------------------

    def attribute(self, name: str) -> np.ndarray:
        return self.attributes[:, :, self.schema.attribute_index(name)]

    def covariate(self, name: str) -> np.ndarray:
        return self.covariates[:, self.schema.covariate_index(name)]

    @property
    def segment_labels(self) -> List[str]:
        """Distinct nonempty segment labels, sorted."""
        return sorted({str(s) for s in self.segments if s})

    def segment(self, label: str) -> "ChoiceDataset":
        """Situations of segment ``label``, in dataset order."""
        rows = np.flatnonzero(self.segments == label)
        if rows.size == 0:
            raise SchemaError(f"no situations in segment '{label}' (segments: {self.segment_labels or 'none'})")
        return self.subset(rows)

    def chosen_mask(self) -> np.ndarray:
        """(N, J) boolean mask of the chosen slot."""
        mask = np.zeros(self.available.shape, dtype=bool)
        rows = np.flatnonzero(self.chosen >= 0)
        mask[rows, self.chosen[rows]] = True
        return mask

    # -- situation views -----------------------------------------------------

    def situation(self, n: int) -> ChoiceSituation:
        slots = np.flatnonzero(self.present[n])
        alternatives = tuple(
            AlternativeRecord(
                alt_id=str(self.alt_ids[n, j]),
                attributes=tuple(float(v) for v in self.attributes[n, j]),
                available=bool(self.available[n, j]),
            )
            for j in slots
        )
        chosen = str(self.alt_ids[n, self.chosen[n]]) if self.chosen[n] >= 0 else None
        return ChoiceSituation(
            situation_id=str(self.situation_ids[n]),
            respondent_id=str(self.respondent_ids[n]),
            alternatives=alternatives,
            chosen=chosen,
            covariates=tuple(float(v) for v in self.covariates[n]),
            schema=self.schema,
            segment=str(self.segments[n]),
        )

    @property
    def situations(self) -> List[ChoiceSituation]:
        return [self.situation(n) for n in range(len(self))]

    def __iter__(self) -> Iterator[ChoiceSituation]:
        for n in range(len(self)):
            yield self.situation(n)

    @classmethod
    def from_situations(cls, schema: AttributeSchema, situations: Sequence[ChoiceSituation]) -> "ChoiceDataset":
        """Assemble a dataset from situation records, padding narrower ones."""
        if not situations:
            raise SchemaError("a choice dataset needs at least one situation")
        n, j = len(situations), max(len(s.alternatives) for s in situations)
        k, c = schema.n_attributes, schema.n_covariates
        alt_ids = np.full((n, j), "", dtype=object)
        attributes = np.zeros((n, j, k))
        available = np.zeros((n, j), dtype=bool)
        present = np.zeros((n, j), dtype=bool)
        chosen = np.full(n, -1, dtype=np.int64)
        covariates = np.zeros((n, c))
        for i, situation in enumerate(situations):
            for slot, alt in enumerate(situation.alternatives):
                if len(alt.attributes) != k:
                    raise SchemaError(
                        f"situation '{situation.situation_id}' alternative '{alt.alt_id}' has "
                        f"{len(alt.attributes)} attributes, schema declares {k}"
                    )
                alt_ids[i, slot] = alt.alt_id
                attributes[i, slot] = alt.attributes
                available[i, slot] = alt.available
                present[i, slot] = True
            if situation.chosen is not None:
                chosen[i] = situation.alt_ids.index(situation.chosen)
            covariates[i] = situation.covariates
        return cls(
            schema=schema,
            situation_ids=np.array([s.situation_id for s in situations], dtype=object),
            respondent_ids=np.array([s.respondent_id for s in situations], dtype=object),
            alt_ids=alt_ids,
            attributes=attributes,
            available=available,
            present=present,
            chosen=chosen,
            covariates=covariates,
            segments=np.array([s.segment for s in situations], dtype=object),
        )

    # -- derived datasets ----------------------------------------------------

    def _replace(self, **changes) -> "ChoiceDataset":
        fields = {
            "schema": self.schema,
            "situation_ids": self.situation_ids,
            "respondent_ids": self.respondent_ids,
            "alt_ids": self.alt_ids,
            "attributes": self.attributes,
            "available": self.available,
            "present": self.present,
            "chosen": self.chosen,
            "covariates": self.covariates,
            "segments": self.segments,
        }
        fields.update(changes)
        return ChoiceDataset(**fields)

    def subset(self, indices: Sequence[int]) -> "ChoiceDataset":
        """Situations at ``indices`` in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return ChoiceDataset(
            schema=self.schema,
            situation_ids=self.situation_ids[idx],
            respondent_ids=self.respondent_ids[idx],
            alt_ids=self.alt_ids[idx],
            attributes=self.attributes[idx],
            available=self.available[idx],
            present=self.present[idx],
            chosen=self.chosen[idx],
            covariates=self.covariates[idx],
            segments=self.segments[idx],
        )

    def with_choices(self, chosen: np.ndarray) -> "ChoiceDataset":
        return self._replace(chosen=np.asarray(chosen, dtype=np.int64))

    def with_attribute(self, name: str, slot: int, values: np.ndarray) -> "ChoiceDataset":
        """Copy with attribute ``name`` of alternative slot ``slot`` replaced by ``values``."""
        attributes = np.array(self.attributes, copy=True)
        attributes[:, slot, self.schema.attribute_index(name)] = values
        return self._replace(attributes=attributes)

    def with_attributes(self, attributes: np.ndarray) -> "ChoiceDataset":
        return self._replace(attributes=attributes)

    def equals(self, other: "ChoiceDataset", rtol: float = 1e-11) -> bool:
        """Field-for-field equality; real values compared to ``rtol``."""
        if not isinstance(other, ChoiceDataset) or self.schema != other.schema:
            return False
        if self.alt_ids.shape != other.alt_ids.shape:
            return False
        exact = ("situation_ids", "respondent_ids", "alt_ids", "available", "present", "chosen", "segments")
        if not all(np.array_equal(getattr(self, f), getattr(other, f)) for f in exact):
            return False
        return bool(
            np.allclose(self.attributes, other.attributes, rtol=rtol, atol=0.0)
            and np.allclose(self.covariates, other.covariates, rtol=rtol, atol=0.0)
        )

    def __eq__(self, other) -> bool:
        return self.equals(other)

    __hash__ = None
