"""Which stored direction vector to replace, and which subset to sample with."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lmfactor import FactorStore
from .rng import RandomSource


@dataclass(frozen=True)
class SelectionParams:
    """Bookkeeping constants.

    Attributes:
        n_steps: target distance, in iterations, between consecutive stored vectors.
        period: the store is updated every ``period`` iterations.
        m_sigma: scale of the half-normal draw of the subset size.
    """

    n_steps: int
    period: int
    m_sigma: float = 4.0

    def __post_init__(self):
        if self.n_steps < 1 or self.period < 1 or not self.m_sigma > 0:
            raise ValueError(f"invalid selection parameters {self}")

    @classmethod
    def for_dimension(cls, n: int) -> "SelectionParams":
        return cls(n_steps=n, period=default_period(n))


def default_period(n: int) -> int:
    # floor(ln n) is 0 for n < 3
    return max(1, int(math.floor(math.log(n))))


@dataclass(frozen=True)
class SubsetChoice:
    m_star: int
    positions: range


def select_subset(params: SelectionParams, count: int, k: int, src: RandomSource) -> SubsetChoice:
    """Draw the number of newest pairs used to sample candidate ``k``.

    ``k`` is the 0-based candidate index; candidate 0 uses a ten times
    wider half-normal so that older vectors get exercised too. One Gaussian
    is consumed regardless of ``count``.
    """
    scale = 10.0 * params.m_sigma if k == 0 else params.m_sigma
    m_star = min(int(math.floor(scale * abs(src.gaussian()))), count)
    return SubsetChoice(m_star, range(count - m_star, count))


def update_set(params: SelectionParams, store: FactorStore, t: int, p_c) -> tuple[int, int]:
    """Store ``p_c`` into the factor store, evicting a vector if full.

    While filling, ``p_c`` goes into the next free slot. Once full, the
    consecutive pair whose stamp gap falls furthest below ``n_steps`` loses
    its newer member; if every gap already reaches ``n_steps`` the oldest
    vector is evicted instead. The chosen slot becomes the newest.

    Only the ``P`` row and the bookkeeping are written; the caller refreshes
    inverses with ``store.update_inverses(start)``.

    Returns:
        ``(slot, start)``: the physical row written and the first temporal
        position whose inverse vector is stale.
    """
    j, l, m = store.j, store.l, store.m
    if len(j) < m:
        slot = len(j)
        j.append(slot)
        start = slot
    else:
        pos = 0
        if m > 1:
            gaps = l[j[1:]] - l[j[:-1]] - params.n_steps
            i = int(np.argmin(gaps))
            if gaps[i] < 0:
                pos = i + 1
        slot = j.pop(pos)
        j.append(slot)
        start = pos
    l[slot] = (t // params.period) * params.period
    store.P[slot] = p_c
    return slot, start
