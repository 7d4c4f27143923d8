"""Benchmark objectives, rotations and the initialization protocol.

Function ids are stable lowercase strings: ``sphere``, ``elli``, ``rosen``,
``discus``, ``cigar``, ``diffpow``, ``nesterov``, and each with a ``rot_``
prefix for the rotated variant ``f(Rx)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .exceptions import CapacityError

ROTATION_CAP = 2048


# Each objective maps the last axis to a value, so a (lam, n) population is
# evaluated row by row with the same reductions as a single vector.


@lru_cache(maxsize=32)
def _elli_weights(n):
    return 10.0 ** (6.0 * np.arange(n) / (n - 1))


@lru_cache(maxsize=32)
def _diffpow_exponents(n):
    return 2.0 + 4.0 * np.arange(n) / (n - 1)


def sphere(x):
    return np.sum(x * x, axis=-1)


def elli(x):
    return np.sum(_elli_weights(x.shape[-1]) * x * x, axis=-1)


def rosen(x):
    head, tail = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (head * head - tail) ** 2 + (head - 1.0) ** 2, axis=-1)


def discus(x):
    rest = x[..., 1:]
    return 1e6 * x[..., 0] * x[..., 0] + np.sum(rest * rest, axis=-1)


def cigar(x):
    rest = x[..., 1:]
    return x[..., 0] * x[..., 0] + 1e6 * np.sum(rest * rest, axis=-1)


def diffpow(x):
    return np.sum(np.abs(x) ** _diffpow_exponents(x.shape[-1]), axis=-1)


def nesterov(x):
    """Second nonsmooth Nesterov-Chebyshev-Rosenbrock variant."""
    return 0.25 * np.abs(x[..., 0] - 1.0) + np.sum(
        np.abs(x[..., 1:] - 2.0 * np.abs(x[..., :-1]) + 1.0), axis=-1)


BASE_FUNCTIONS = {
    "sphere": sphere,
    "elli": elli,
    "rosen": rosen,
    "discus": discus,
    "cigar": cigar,
    "diffpow": diffpow,
    "nesterov": nesterov,
}

FUNCTION_IDS = tuple(BASE_FUNCTIONS) + tuple("rot_" + k for k in BASE_FUNCTIONS)


def make_rotation(n: int, seed: int, cap: int = ROTATION_CAP) -> np.ndarray:
    """Seeded random orthogonal matrix.

    QR of a standard Gaussian matrix with the signs of ``diag(R)`` folded
    into ``Q``, which makes the result Haar distributed.

    Raises:
        CapacityError: if ``n`` exceeds ``cap`` (rotated evaluation is O(n^2)).
    """
    if n < 2:
        raise ValueError(f"rotation dimension must be >= 2, got {n}")
    if n > cap:
        raise CapacityError(f"rotation dimension {n} exceeds the rotation cap of {cap}")
    gen = np.random.Generator(np.random.PCG64(seed))
    g = gen.standard_normal((n, n))
    q, r = np.linalg.qr(g)
    q *= np.sign(np.diag(r))
    return q


@dataclass
class BenchmarkProblem:
    function_id: str
    dimension: int
    rotation: np.ndarray | None = field(default=None, repr=False)
    rotation_seed: int | None = None
    target_f: float = 1e-10
    init_lower: float = -5.0
    init_upper: float = 5.0
    sigma0: float = 3.0

    def __post_init__(self):
        if self.function_id not in FUNCTION_IDS:
            raise ValueError(f"unknown function id {self.function_id!r}; "
                             f"expected one of {', '.join(FUNCTION_IDS)}")
        if self.dimension < 2:
            raise ValueError(f"dimension must be >= 2, got {self.dimension}")
        if not self.target_f > 0:
            raise ValueError("target_f must be positive")
        if not self.init_lower < self.init_upper:
            raise ValueError("init_lower must be below init_upper")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if self.rotated:
            if self.rotation is None:
                self.rotation = make_rotation(self.dimension, self.rotation_seed or 0)
            r = np.asarray(self.rotation, dtype=float)
            if r.shape != (self.dimension, self.dimension):
                raise ValueError(f"rotation must be {self.dimension}x{self.dimension}")
            if np.max(np.abs(r.T @ r - np.eye(self.dimension))) > 1e-12:
                raise ValueError("rotation matrix is not orthogonal to 1e-12")
            self.rotation = r
        elif self.rotation is not None:
            raise ValueError(f"{self.function_id} is separable; use rot_{self.function_id}")

    @property
    def rotated(self) -> bool:
        return self.function_id.startswith("rot_")

    @property
    def base_id(self) -> str:
        return self.function_id[4:] if self.rotated else self.function_id

    def metadata(self) -> dict:
        return {
            "function_id": self.function_id,
            "dimension": self.dimension,
            "rotation_seed": self.rotation_seed if self.rotated else None,
            "target_f": self.target_f,
            "init_lower": self.init_lower,
            "init_upper": self.init_upper,
            "sigma0": self.sigma0,
        }

    def __call__(self, x) -> float:
        return evaluate(self, x)


def make_problem(function_id: str, n: int, rotation_seed: int = 0, **kwargs) -> BenchmarkProblem:
    rotation = None
    if function_id.startswith("rot_"):
        rotation = make_rotation(n, rotation_seed)
    return BenchmarkProblem(function_id, n, rotation=rotation,
                            rotation_seed=rotation_seed, **kwargs)


def evaluate(problem: BenchmarkProblem, x) -> float:
    """Objective value of ``problem`` at ``x``.

    Raises:
        ValueError: on a length mismatch or any non-finite component.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != problem.dimension:
        raise ValueError(f"expected a vector of length {problem.dimension}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite components")
    if problem.rotated:
        x = problem.rotation @ x
    return float(BASE_FUNCTIONS[problem.base_id](x))


def evaluate_batch(problem: BenchmarkProblem, X) -> np.ndarray:
    """Objective values of the rows of ``X``, bitwise equal to :func:`evaluate` per row."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != problem.dimension:
        raise ValueError(f"expected shape (k, {problem.dimension}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite components")
    if problem.rotated:
        # per-row matvec keeps the floating-point path of evaluate()
        X = np.stack([problem.rotation @ x for x in X])
    return BASE_FUNCTIONS[problem.base_id](X)
