#!/usr/bin/env python3
"""
Stated-preference designs on the courier attribute grid.

Every alternative's attribute levels are drawn uniformly from the grid. With
four alternatives the last one plays the traditional carrier: its shipping
cost is drawn from the levels at or below the cheapest of couriers 1-3 and
its delivery time from the levels at or above the slowest of them.
"""

import logging
import math
from typing import Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.choicedata.models import AttributeKind, AttributeSchema, ChoiceDataset
from src.core.seeding import substream
from src.rum.spec import ModelSpec, RandomCoefficient, Term

logger = logging.getLogger(__name__)

CONSTRAINED_WIDTH = 4


class DesignGrid(BaseModel):
    """
    Attribute levels of the courier experiment.

    Delivery time is in hours; "once a day" is coded 24 and "within 2-4
    days" 72. Reputation is low/medium/high coded 0/1/2; delivery location
    is home/other/pickup coded 0/1/2; payment is app/cash coded 0/1.
    """
    model_config = ConfigDict(frozen=True)

    shipping_cost: Tuple[float, ...] = (14.0, 18.0, 22.0, 26.0)
    delivery_time: Tuple[float, ...] = (1.5, 3.0, 5.0, 24.0, 72.0)
    reputation: Tuple[float, ...] = (0.0, 1.0, 2.0)
    tracking: Tuple[float, ...] = (0.0, 1.0)
    e_notification: Tuple[float, ...] = (0.0, 1.0)
    p_time_window: Tuple[float, ...] = (0.0, 1.0)
    p_location: Tuple[float, ...] = (0.0, 1.0, 2.0)
    payment: Tuple[float, ...] = (0.0, 1.0)
    tip: Tuple[float, ...] = (0.0, 1.0, 2.0, 3.0)

    # product categories, one drawn per situation; empty for unsegmented designs
    products: Tuple[str, ...] = tuple(f"PD{k}" for k in range(1, 9))

    reputation_coding: Literal["linear", "dummies"] = "linear"
    situations_per_respondent: int = Field(default=2, ge=1)
    covariates: bool = True

    @field_validator(
        "shipping_cost", "delivery_time", "reputation", "tracking", "e_notification",
        "p_time_window", "p_location", "payment", "tip",
    )
    @classmethod
    def _sorted_levels(cls, levels: Tuple[float, ...]) -> Tuple[float, ...]:
        if not levels:
            raise ValueError("every attribute needs at least one level")
        return tuple(sorted(float(v) for v in levels))

    def level_counts(self) -> Dict[str, int]:
        return {
            "shipping_cost": len(self.shipping_cost),
            "delivery_time": len(self.delivery_time),
            "reputation": len(self.reputation),
            "tracking": len(self.tracking),
            "e_notification": len(self.e_notification),
            "p_time_window": len(self.p_time_window),
            "p_location": len(self.p_location),
            "payment": len(self.payment),
            "tip": len(self.tip),
        }

    def reputation_columns(self) -> List[str]:
        return ["reputation"] if self.reputation_coding == "linear" else ["reputation_med", "reputation_high"]

    def schema(self) -> AttributeSchema:
        """Attribute columns of datasets generated from this grid."""
        binary = AttributeKind.BINARY
        names: List[str] = ["shipping_cost", "delivery_time"]
        kinds: List[AttributeKind] = [AttributeKind.CONTINUOUS, AttributeKind.CONTINUOUS]
        levels: Dict[str, List[float]] = {}
        if self.reputation_coding == "linear":
            names.append("reputation")
            kinds.append(AttributeKind.CATEGORICAL)
            levels["reputation"] = list(self.reputation)
        else:
            names += ["reputation_med", "reputation_high"]
            kinds += [binary, binary]
        names += ["tracking", "e_notification", "p_time_window", "p_location_other",
                  "p_location_pickup", "payment_cash", "tip"]
        kinds += [binary] * 6 + [AttributeKind.CATEGORICAL]
        levels["tip"] = list(self.tip)
        return AttributeSchema(
            attribute_names=names,
            attribute_kinds=kinds,
            levels=levels,
            bounds={
                "shipping_cost": (self.shipping_cost[0], self.shipping_cost[-1]),
                "delivery_time": (self.delivery_time[0], self.delivery_time[-1]),
            },
            covariate_names=["income", "full_time"] if self.covariates else [],
        )


def _uniform_between(rng: np.random.Generator, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    """Uniform integer in ``[low, high]`` elementwise."""
    span = high - low + 1
    return low + np.minimum(np.floor(rng.random(low.shape) * span).astype(np.int64), span - 1)


def generate_design(
    grid: DesignGrid,
    n_situations: int,
    n_alternatives: int = 4,
    seed: Optional[int] = None,
) -> ChoiceDataset:
    """
    Draw a design without choices.

    Parameters:
    -----------
    grid : DesignGrid
        Attribute levels and codings.
    n_situations : int
        Number of choice situations (> 0).
    n_alternatives : int
        Alternatives per situation; the carrier constraint applies at 4.
    seed : int
        Run seed; the 'design' substream is used.
    """
    if n_situations < 1:
        raise ValueError("n_situations must be positive")
    if n_alternatives < 2:
        raise ValueError("a choice situation needs at least 2 alternatives")
    rng = substream(seed, "design")
    n, j = n_situations, n_alternatives

    def draw(levels: Tuple[float, ...]) -> np.ndarray:
        return rng.integers(0, len(levels), size=(n, j))

    cost_idx = draw(grid.shipping_cost)
    time_idx = draw(grid.delivery_time)
    if j == CONSTRAINED_WIDTH:
        cost_idx[:, -1] = _uniform_between(rng, np.zeros(n, dtype=np.int64), cost_idx[:, :-1].min(axis=1))
        time_idx[:, -1] = _uniform_between(
            rng, time_idx[:, :-1].max(axis=1), np.full(n, len(grid.delivery_time) - 1, dtype=np.int64)
        )
    reputation = np.asarray(grid.reputation)[draw(grid.reputation)]
    tracking = np.asarray(grid.tracking)[draw(grid.tracking)]
    e_notification = np.asarray(grid.e_notification)[draw(grid.e_notification)]
    time_window = np.asarray(grid.p_time_window)[draw(grid.p_time_window)]
    location = np.asarray(grid.p_location)[draw(grid.p_location)]
    payment = np.asarray(grid.payment)[draw(grid.payment)]
    tip = np.asarray(grid.tip)[draw(grid.tip)]
    if j == CONSTRAINED_WIDTH:
        # the traditional carrier takes no tips
        tip[:, -1] = 0.0

    columns = [np.asarray(grid.shipping_cost)[cost_idx], np.asarray(grid.delivery_time)[time_idx]]
    if grid.reputation_coding == "linear":
        columns.append(reputation)
    else:
        columns += [(reputation == 1).astype(float), (reputation == 2).astype(float)]
    columns += [tracking, e_notification, time_window, (location == 1).astype(float),
                (location == 2).astype(float), payment, tip]
    attributes = np.stack(columns, axis=-1).astype(float)

    per = grid.situations_per_respondent
    n_respondents = math.ceil(n / per)
    respondent = np.arange(n) // per
    if grid.covariates:
        income = rng.integers(1, 6, size=n_respondents).astype(float)
        full_time = rng.integers(0, 2, size=n_respondents).astype(float)
        covariates = np.column_stack([income[respondent], full_time[respondent]])
    else:
        covariates = np.zeros((n, 0))
    segments = None
    if grid.products:
        segments = np.asarray(grid.products, dtype=object)[rng.integers(0, len(grid.products), size=n)]

    schema = grid.schema()
    dataset = ChoiceDataset(
        schema=schema,
        situation_ids=np.array([f"s{i + 1}" for i in range(n)], dtype=object),
        respondent_ids=np.array([f"r{r + 1}" for r in respondent], dtype=object),
        alt_ids=np.tile(np.array([f"C{k + 1}" for k in range(j)], dtype=object), (n, 1)),
        attributes=attributes,
        available=np.ones((n, j), dtype=bool),
        present=np.ones((n, j), dtype=bool),
        chosen=np.full(n, -1, dtype=np.int64),
        covariates=covariates,
        segments=segments,
    )
    logger.info(f"Generated design: {n} situations, {j} alternatives, {n_respondents} respondents")
    return dataset


def courier_model_spec(
    grid: Optional[DesignGrid] = None,
    n_alternatives: int = 4,
    random_cost: bool = True,
) -> ModelSpec:
    """
    Default specification for grid data: every attribute generic, constants
    for all couriers but the last, full-time employment shifting couriers
    1-3, and optionally a normally distributed cost coefficient.
    """
    grid = grid or DesignGrid()
    attributes = grid.schema().attribute_names
    terms = [Term.parse(name) for name in attributes]
    if grid.covariates:
        terms.append(Term(name="b_full_time_cs", covariate="full_time",
                          alternatives=tuple(range(n_alternatives - 1))))
    reference = n_alternatives - 1
    return ModelSpec(
        terms=tuple(terms),
        constants=tuple(k != reference for k in range(n_alternatives)),
        reference_alternative=reference,
        random_coefficients=(RandomCoefficient(coefficient="b_shipping_cost"),) if random_cost else (),
    )
