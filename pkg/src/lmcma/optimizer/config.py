"""Hyperparameters of LM-CMA and the Cholesky-CMA-ES baseline."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..selection import SelectionParams, default_period

PRESETS = ("default", "nesterov")


def default_lambda(n: int) -> int:
    return 4 + int(math.floor(3.0 * math.log(n)))


def recombination_weights(mu: int) -> np.ndarray:
    """Log-decreasing positive weights summing to one."""
    i = np.arange(1, mu + 1)
    num = math.log(mu + 1) - np.log(i)
    den = mu * math.log(mu + 1) - float(np.sum(np.log(i)))
    return num / den


def resolve_m(n: int, m) -> int:
    """``m`` as an int; accepts ``None`` (default), ``"2sqrt"`` or a number."""
    if m is None or m == "default":
        return 4 + int(math.floor(3.0 * math.log(n)))
    if m == "2sqrt":
        return int(math.floor(2.0 * math.sqrt(n)))
    m = int(m)
    if m < 1:
        raise ValueError(f"m must be positive, got {m}")
    return m


@dataclass
class OptimizerConfig:
    """LM-CMA settings. Fields left as ``None`` take dimension-based defaults.

    The ``nesterov`` preset doubles the population, multiplies ``c1`` by 15,
    sets ``c_sigma = 0.3 / n**2`` and turns restarts on.
    """

    n: int
    lam: int | None = None
    mu: int | None = None
    c_sigma: float | None = None
    z_star: float = 0.25
    m: int | str | None = None
    n_steps: int | None = None
    c_c: float | None = None
    c1: float | None = None
    d_sigma: float = 1.0
    period: int | None = None
    m_sigma: float = 4.0
    restarts: bool | None = None
    preset: str = "default"
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    mu_w: float = field(init=False)

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise ValueError(f"dimension must be >= 2, got {n}")
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}; expected one of {PRESETS}")
        tuned = self.preset == "nesterov"
        if self.lam is None:
            self.lam = default_lambda(n) * (2 if tuned else 1)
        if self.mu is None:
            self.mu = self.lam // 2
        if self.c_sigma is None:
            self.c_sigma = 0.3 / n**2 if tuned else 0.3
        self.m = resolve_m(n, self.m)
        if self.n_steps is None:
            self.n_steps = n
        if self.c_c is None:
            self.c_c = 0.5 / math.sqrt(n)
        if self.c1 is None:
            self.c1 = (15.0 if tuned else 1.0) / (10.0 * math.log(n + 1))
        if self.period is None:
            self.period = default_period(n)
        if self.restarts is None:
            self.restarts = tuned
        if self.lam < 2 or not 1 <= self.mu <= self.lam:
            raise ValueError(f"need lam >= 2 and 1 <= mu <= lam, got lam={self.lam}, mu={self.mu}")
        for name in ("c_sigma", "c1"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")
        # c_c = 1 is the memoryless limit of the evolution path
        if not 0.0 < self.c_c <= 1.0:
            raise ValueError(f"c_c must lie in (0, 1], got {self.c_c}")
        if not self.d_sigma > 0:
            raise ValueError("d_sigma must be positive")
        self.weights = recombination_weights(self.mu)
        self.mu_w = float(1.0 / np.sum(self.weights**2))

    @property
    def selection(self) -> SelectionParams:
        return SelectionParams(self.n_steps, self.period, self.m_sigma)

    def with_overrides(self, **kw) -> "OptimizerConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weights"] = self.weights.tolist()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = {k: v for k, v in data.items() if k not in ("weights", "mu_w")}
        return cls(**data)


@dataclass
class CholeskyConfig:
    """Cholesky-CMA-ES settings (rank-one update, cumulative step-size adaptation)."""

    n: int
    lam: int | None = None
    mu: int | None = None
    c_sigma: float | None = None
    d_sigma: float | None = None
    c_c: float | None = None
    c1: float | None = None
    preset: str = "default"
    weights: np.ndarray = field(init=False, repr=False, compare=False)
    mu_w: float = field(init=False)
    chi_n: float = field(init=False)

    def __post_init__(self):
        n = self.n
        if n < 2:
            raise ValueError(f"dimension must be >= 2, got {n}")
        if self.lam is None:
            self.lam = default_lambda(n)
        if self.mu is None:
            self.mu = self.lam // 2
        self.weights = recombination_weights(self.mu)
        self.mu_w = float(1.0 / np.sum(self.weights**2))
        mu_w = self.mu_w
        if self.c_sigma is None:
            self.c_sigma = math.sqrt(mu_w) / (math.sqrt(n) + math.sqrt(mu_w))
        if self.d_sigma is None:
            self.d_sigma = 1.0 + self.c_sigma + 2.0 * max(0.0, math.sqrt((mu_w - 1.0) / (n + 1.0)) - 1.0)
        if self.c_c is None:
            self.c_c = 4.0 / (n + 4.0)
        if self.c1 is None:
            self.c1 = 2.0 / (n + math.sqrt(2.0)) ** 2
        # E||N(0, I)||
        self.chi_n = math.sqrt(n) * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["weights"] = self.weights.tolist()
        return d
