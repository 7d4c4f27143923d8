"""Population Success Rule step-size control.

Both generations are ranked together; the normalized rank-sum advantage of
the current generation over the previous one, minus a target ratio, is
smoothed into ``s`` and the step-size is multiplied by ``exp(s / d_sigma)``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np

from ._kernels import rank_sum_difference


@dataclass
class PsrState:
    c_sigma: float = 0.3
    z_star: float = 0.25
    d_sigma: float = 1.0
    s: float = 0.0
    prev_fitness: np.ndarray | None = None
    last_z: float | None = None

    def to_dict(self) -> dict:
        return {
            "c_sigma": self.c_sigma, "z_star": self.z_star, "d_sigma": self.d_sigma,
            "s": self.s, "last_z": self.last_z,
            "prev_fitness": None if self.prev_fitness is None else self.prev_fitness.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PsrState":
        data = dict(data)
        prev = data.pop("prev_fitness")
        return cls(prev_fitness=None if prev is None else np.array(prev, dtype=float), **data)


def success_measure(prev_fitness, curr_fitness, z_star: float) -> float:
    """Normalized rank-sum difference minus ``z_star``.

    Ranks run from 1 (best) to ``2*lam``; on ties, previous-generation
    entries rank first.
    """
    prev = np.asarray(prev_fitness, dtype=float)
    curr = np.asarray(curr_fitness, dtype=float)
    lam = curr.shape[0]
    if prev.shape != (lam,):
        raise ValueError(f"fitness lists differ in length: {prev.shape[0]} vs {lam}")
    return rank_sum_difference(prev, curr) / lam**2 - z_star


def psr_update(state: PsrState, curr_fitness, sigma: float) -> float:
    """Advance ``state`` by one generation and return the new step-size.

    On the first generation there is nothing to compare with: the fitness
    values are stored and ``sigma`` is returned unchanged.
    """
    curr = np.array(curr_fitness, dtype=float)
    if not np.isfinite(curr).all():
        raise ValueError("fitness values must be finite")
    if state.prev_fitness is None:
        state.prev_fitness = curr
        return sigma
    z = success_measure(state.prev_fitness, curr, state.z_star)
    state.last_z = z
    state.s = (1.0 - state.c_sigma) * state.s + state.c_sigma * z
    state.prev_fitness = curr
    # floor keeps sigma strictly positive after extreme shrinking
    return max(sigma * math.exp(state.s / state.d_sigma), sys.float_info.min)
