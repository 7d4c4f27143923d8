"""Seedable random source for the optimizers.

Backed by numpy's PCG64 bit generator, whose state is a plain dict and can
be serialized for checkpoints. Sub-streams for parallel workers are derived
through ``SeedSequence`` spawn keys, i.e. a hash of ``(seed, worker)``.
"""

from __future__ import annotations

import numpy as np


class RandomSource:
    """Single-owner random stream.

    Args:
        seed: 64-bit integer seed.
        worker: optional worker index; distinct workers sharing ``seed``
            receive statistically independent streams.
    """

    def __init__(self, seed: int, worker: int | None = None):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self.worker = worker
        spawn_key = () if worker is None else (int(worker),)
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)
        self._bitgen = np.random.PCG64(ss)
        self._gen = np.random.Generator(self._bitgen)

    def gaussian(self) -> float:
        """One standard normal draw."""
        return float(self._gen.standard_normal())

    def gaussian_vector(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(n)

    def rademacher_vector(self, n: int) -> np.ndarray:
        """``n`` independent fair signs as a float64 array of +-1."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        # u >= 1/2 maps to +1; compiled samplers use the same rule
        return np.where(self._gen.random(n) >= 0.5, 1.0, -1.0)

    @property
    def generator(self) -> np.random.Generator:
        """Underlying numpy generator, shared with compiled samplers."""
        return self._gen

    def uniform_vector(self, low: float, high: float, n: int) -> np.ndarray:
        return self._gen.uniform(low, high, size=n)

    def spawn(self, worker: int) -> "RandomSource":
        """Independent sub-stream for ``worker``, derived from the seed only."""
        return RandomSource(self.seed, worker=worker)

    def get_state(self) -> dict:
        return {
            "seed": self.seed,
            "worker": self.worker,
            "bit_generator": self._bitgen.state,
        }

    @classmethod
    def from_state(cls, state: dict) -> "RandomSource":
        src = cls(state["seed"], worker=state.get("worker"))
        src._bitgen.state = state["bit_generator"]
        return src
