"""Seeded pseudo-randomness with per-source stream splitting.

Every random draw in a simulation comes from a counter-based Philox4x32
generator.  A (seed, stream-key) pair fully determines the draw sequence,
bit-identically across runs and platforms; independent model components use
distinct stream keys (hierarchical spawn), so adding draws to one component
never perturbs another.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Generator, Philox, SeedSequence

# Recorded in every report header.
ALGORITHM = "philox4x32"

# Stream-key registry.  Streams are cheap; components must not share one.
STREAM_ARRIVALS = 0
STREAM_ADDRESSES = 1
STREAM_RW = 2
STREAM_CORE_GAPS = 10
STREAM_CORE_LATENCY = 11
STREAM_CORE_DEPS = 12
STREAM_CORE_WRITES = 13
STREAM_SYNTHETIC = 20


class Rng:
    """One Philox stream, identified by (seed, stream key tuple)."""

    def __init__(self, seed: int, stream: int | tuple = ()):
        if seed < 0:
            raise ValueError("seed must be non-negative")
        if isinstance(stream, int):
            stream = (stream,)
        self.seed = seed
        self.stream = tuple(stream)
        self.gen: Generator = Generator(
            Philox(SeedSequence(seed, spawn_key=self.stream))
        )

    def spawn(self, key: int) -> "Rng":
        """A child stream; children of distinct keys are independent."""
        return Rng(self.seed, self.stream + (key,))

    # Bulk draws (model code draws in chunks for speed; the chunking does not
    # change the stream's sequence).

    def exponential_ticks(self, mean_ticks: float, n: int) -> np.ndarray:
        """n exponential gaps with the given mean, rounded to integer ticks."""
        return np.rint(self.gen.exponential(mean_ticks, n)).astype(np.int64)

    def uniform_lines(self, n_lines: int, n: int) -> np.ndarray:
        """n uniform 64-byte-line indices in [0, n_lines)."""
        return self.gen.integers(0, n_lines, size=n, dtype=np.int64)

    def bernoulli(self, p: float, n: int) -> np.ndarray:
        return self.gen.random(n) < p

    def geometric(self, p: float, n: int) -> np.ndarray:
        """n geometric draws (support 1, 2, ...) with success probability p."""
        return self.gen.geometric(p, size=n).astype(np.int64)
