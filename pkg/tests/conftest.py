"""Shared fixtures: small hand-built datasets and synthetic courier data."""

import numpy as np
import pytest

from src.synth.design import DesignGrid, courier_model_spec, generate_design
from src.synth.simulator import default_truth, simulate_choices
from tests.helpers import make_dataset


@pytest.fixture
def binary_cost_dataset():
    """One situation, costs 14 and 26, first alternative chosen."""
    return make_dataset([[14.0, 26.0]], chosen=[0])


@pytest.fixture
def random_dataset():
    """Three attributes, four alternatives, random choices; two tasks per respondent."""
    rng = np.random.default_rng(11)
    n, j = 60, 4
    return make_dataset(
        rng.normal(size=(n, j, 3)),
        chosen=rng.integers(0, j, size=n),
        names=("x1", "x2", "x3"),
        respondents=[f"r{i // 2}" for i in range(n)],
    )


@pytest.fixture
def courier_grid():
    return DesignGrid()


@pytest.fixture
def courier_fixed_spec(courier_grid):
    return courier_model_spec(courier_grid, 4, random_cost=False)


@pytest.fixture
def courier_design(courier_grid):
    return generate_design(courier_grid, 400, 4, seed=3)


@pytest.fixture
def courier_choices(courier_design, courier_fixed_spec):
    """Courier design with RUM choices simulated at the default truth."""
    truth = default_truth(courier_fixed_spec)
    return simulate_choices(courier_design, courier_fixed_spec, truth, "RUM", seed=3)
