"""Implicit Cholesky factor reconstructed from stored direction vectors.

The factor is never formed. It is defined by applying, oldest to newest,
the rank-one update ``A <- a*A + b_k * p_k v_k^T`` starting from the
identity, where ``v_k = A^{-1} p_k`` is taken w.r.t. the factor built from
the strictly older pairs. Products with the factor and its inverse cost
O(len(idx) * n).

Temporal positions are 0-based: position 0 is the oldest stored pair and
``count - 1`` the newest. ``j[pos]`` maps a position to a physical row of
``P``/``V``.
"""

from __future__ import annotations

import math

import numpy as np

from ._kernels import ainvz_kernel, az_kernel, coefficients, update_inverses_kernel
from .exceptions import DegenerateVectorError

NORM_EPS = 1e-300


class FactorStore:
    """Ring of ``m`` direction-vector pairs ``(p, v)`` and their coefficients.

    Args:
        n: problem dimension.
        m: number of pairs that can be stored.
        c1: learning rate of each rank-one update, in (0, 1).
    """

    def __init__(self, n: int, m: int, c1: float):
        if n < 1 or m < 1:
            raise ValueError("n and m must be positive")
        if not 0.0 < c1 < 1.0:
            raise ValueError(f"c1 must lie in (0, 1), got {c1}")
        self.n = n
        self.m = m
        self.c1 = c1
        self.a = math.sqrt(1.0 - c1)
        self.c_inv = 1.0 / self.a
        self.P = np.zeros((m, n))
        self.V = np.zeros((m, n))
        self.b = np.zeros(m)
        self.d = np.zeros(m)
        self.l = np.zeros(m, dtype=np.int64)
        self.j: list[int] = []
        self.inactive: set[int] = set()
        # instrumentation: number of length-n inner products performed
        self.dot_count = 0

    @property
    def count(self) -> int:
        return len(self.j)

    def _positions(self, idx) -> np.ndarray:
        count = len(self.j)
        if idx is None:
            return np.arange(count)
        if isinstance(idx, range):
            if len(idx) and (idx.step < 1 or idx.start < 0 or idx[-1] >= count):
                raise ValueError(f"positions {idx} out of range for {count} stored pairs")
            return np.arange(idx.start, idx.stop, idx.step)
        pos = np.array([int(t) for t in idx], dtype=np.int64)
        if len(pos) and (pos[0] < 0 or pos[-1] >= count or np.any(np.diff(pos) <= 0)):
            raise ValueError(f"positions {pos.tolist()} must be strictly increasing within [0, {count})")
        return pos

    def _check_vector(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"expected a vector of length {self.n}, got shape {z.shape}")
        return z

    def az(self, z, idx=None) -> np.ndarray:
        """Product of the factor reconstructed from ``idx`` with ``z``.

        Every inner product is taken with the original ``z``; ``z`` itself
        is left untouched.
        """
        z = self._check_vector(z)
        positions = self._positions(idx)
        self.dot_count += len(positions)
        return az_kernel(z, positions, self.P, self.V, self.b, self.j_array(), self.a)

    def ainvz(self, z, idx=None) -> np.ndarray:
        """Product of the inverse factor with ``z``.

        Unlike :meth:`az`, each inner product uses the running iterate.
        """
        z = self._check_vector(z)
        positions = self._positions(idx)
        self.dot_count += len(positions)
        return ainvz_kernel(z, positions, self.V, self.d, self.j_array(), self.c_inv)

    def j_array(self) -> np.ndarray:
        return np.array(self.j, dtype=np.int64)

    def update_coefficients(self, slot: int) -> None:
        """Refresh ``b[slot]`` and ``d[slot]`` from the current ``V[slot]``.

        Raises:
            DegenerateVectorError: if ``||v||^2 <= 1e-300`` or overflows.
        """
        v2, b, d = coefficients(self.V[slot], self.c1, self.a)
        if not NORM_EPS < v2 < math.inf:
            raise DegenerateVectorError(f"slot {slot}: squared norm {v2:g} is degenerate")
        self.b[slot] = b
        self.d[slot] = d

    def update_inverses(self, start: int = 0) -> list[int]:
        """Recompute ``v`` (and ``b``, ``d``) for positions ``start..count-1``.

        Each ``v`` is rebuilt against the strictly older pairs only. A pair
        whose ``v`` is degenerate gets ``b = d = 0``, which reduces its
        update to pure scaling by ``a``.

        Returns:
            Slots that were found degenerate.
        """
        count = len(self.j)
        if not 0 <= start <= count:
            raise ValueError(f"start {start} out of range for {count} stored pairs")
        flags = update_inverses_kernel(self.P, self.V, self.b, self.d, self.j_array(), start,
                                       self.c1, self.a, self.c_inv, NORM_EPS)
        # position pos costs pos inner products
        self.dot_count += sum(range(start, count))
        degenerate = []
        for pos in range(start, count):
            s = self.j[pos]
            if flags[pos]:
                self.inactive.add(s)
                degenerate.append(s)
            else:
                self.inactive.discard(s)
        return degenerate

    def replace_vector(self, slot: int, p_new) -> list[int]:
        """Overwrite ``P[slot]`` in place and refresh it and every newer pair."""
        p_new = self._check_vector(p_new)
        if not np.all(np.isfinite(p_new)):
            raise ValueError("direction vector contains non-finite components")
        pos = self.j.index(slot)
        self.P[slot] = p_new
        return self.update_inverses(pos)

    def push(self, p_new) -> int:
        """Append ``p_new`` as the newest pair (fill phase only)."""
        if len(self.j) >= self.m:
            raise ValueError("store is full")
        slot = len(self.j)
        self.j.append(slot)
        self.P[slot] = self._check_vector(p_new)
        self.update_inverses(slot)
        return slot

    def dense_factor(self, idx=None) -> np.ndarray:
        """Dense ``n x n`` factor, column by column (diagnostics only)."""
        eye = np.eye(self.n)
        return np.column_stack([self.az(eye[:, i], idx) for i in range(self.n)])

    def eigenspectrum(self) -> np.ndarray:
        """Eigenvalues of ``A A^T`` in ascending order."""
        a = self.dense_factor()
        return np.linalg.eigvalsh(a @ a.T)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "m": self.m, "c1": self.c1,
            "P": self.P.tolist(), "V": self.V.tolist(),
            "b": self.b.tolist(), "d": self.d.tolist(),
            "l": self.l.tolist(), "j": list(self.j),
            "inactive": sorted(self.inactive),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FactorStore":
        store = cls(data["n"], data["m"], data["c1"])
        store.P = np.array(data["P"], dtype=float).reshape(store.m, store.n)
        store.V = np.array(data["V"], dtype=float).reshape(store.m, store.n)
        store.b = np.array(data["b"], dtype=float)
        store.d = np.array(data["d"], dtype=float)
        store.l = np.array(data["l"], dtype=np.int64)
        store.j = [int(s) for s in data["j"]]
        store.inactive = set(data["inactive"])
        return store
