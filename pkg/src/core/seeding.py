#!/usr/bin/env python3
"""
Named random substreams.

Every stochastic step draws from a generator derived from the run seed and a
stream name, so changing how many numbers one component consumes never
shifts another component's draws.
"""

import zlib

import numpy as np

STREAMS = ("design", "simulation", "split", "draws", "wtp_density")


def stream_seed(seed: int, stream: str) -> np.random.SeedSequence:
    """Return the seed sequence for ``stream`` under the run ``seed``."""
    if seed is None:
        raise ValueError("a seed is required for stochastic operations")
    return np.random.SeedSequence([int(seed), zlib.crc32(stream.encode("utf-8"))])


def substream(seed: int, stream: str) -> np.random.Generator:
    """Generator for a named substream of ``seed``."""
    return np.random.default_rng(stream_seed(seed, stream))
