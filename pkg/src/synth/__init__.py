"""Synthetic stated-preference designs and simulated choices."""

from .design import DesignGrid, courier_model_spec, generate_design
from .simulator import DEFAULT_TRUTH, default_truth, read_truth, simulate_choices, truth_metadata, write_simulation

__all__ = [
    "DEFAULT_TRUTH",
    "DesignGrid",
    "courier_model_spec",
    "default_truth",
    "generate_design",
    "read_truth",
    "simulate_choices",
    "truth_metadata",
    "write_simulation",
]
