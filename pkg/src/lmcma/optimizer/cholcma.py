"""Dense (mu/mu_w, lambda)-Cholesky-CMA-ES, the O(n^2) baseline.

Keeps the Cholesky factor ``A`` and its inverse explicitly and applies the
same rank-one update that LM-CMA reconstructs implicitly.
"""

from __future__ import annotations

import math

import numpy as np

from ..bench import ROTATION_CAP
from ..exceptions import CapacityError, NumericalError
from ..lmfactor import NORM_EPS
from ..rng import RandomSource
from .config import CholeskyConfig
from .lmcma import Population

DENSE_CAP = ROTATION_CAP


def rank_one_factor_update(A, A_inv, p, v, c1):
    """Updated ``(A, A_inv)`` for ``C <- (1-c1) C + c1 p p^T`` with ``v = A_inv p``.

    A degenerate ``v`` reduces the update to pure scaling.
    """
    a = math.sqrt(1.0 - c1)
    v2 = float(v @ v)
    if not NORM_EPS < v2 < math.inf:
        return a * A, A_inv / a
    root = math.sqrt(1.0 + c1 / (1.0 - c1) * v2)
    b = a / v2 * (root - 1.0)
    d = 1.0 / (a * v2) * (1.0 - 1.0 / root)
    A_new = a * A + b * np.outer(p, v)
    A_inv_new = A_inv / a - d * np.outer(v, v @ A_inv)
    return A_new, A_inv_new


class CholeskyCMAES:
    """Ask/tell Cholesky-CMA-ES with Gaussian sampling and CSA step-size control."""

    def __init__(self, config: CholeskyConfig, mean, sigma: float, seed: int = 0,
                 rng: RandomSource | None = None):
        n = config.n
        if n > DENSE_CAP:
            raise CapacityError(f"dense factors limited to n <= {DENSE_CAP}, got {n}")
        mean = np.array(mean, dtype=float)
        if mean.shape != (n,):
            raise ValueError(f"mean must have length {n}, got shape {mean.shape}")
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0.0 <= config.c1 < 1.0:
            raise ValueError(f"c1 must lie in [0, 1), got {config.c1}")
        self.config = config
        self.mean = mean
        self.sigma = float(sigma)
        self.A = np.eye(n)
        self.A_inv = np.eye(n)
        self.p_sigma = np.zeros(n)
        self.p_c = np.zeros(n)
        self.t = 0
        self.evaluations = 0
        self.best_x = None
        self.best_f = math.inf
        self.rng = rng if rng is not None else RandomSource(seed)

    @property
    def n(self) -> int:
        return self.config.n

    def ask(self) -> Population:
        cfg = self.config
        z = np.stack([self.rng.gaussian_vector(cfg.n) for _ in range(cfg.lam)])
        x = self.mean + self.sigma * (z @ self.A.T)
        return Population(x, z, np.full(cfg.lam, cfg.n), self.mean.copy(), self.sigma)

    def tell(self, population: Population, fitness=None) -> None:
        cholesky_cma_step(self, population, fitness)

    def factor_drift(self) -> float:
        """``max |A A_inv - I|``."""
        return float(np.max(np.abs(self.A @ self.A_inv - np.eye(self.n))))


def cholesky_cma_step(es: CholeskyCMAES, population: Population, fitness=None) -> None:
    cfg = es.config
    f = np.array(population.fitness if fitness is None else fitness, dtype=float)
    if f.shape != (cfg.lam,):
        raise ValueError(f"expected {cfg.lam} fitness values, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("fitness values must be finite")
    population.fitness = f

    order = np.argsort(f, kind="stable")
    sel = order[: cfg.mu]
    new_mean = cfg.weights @ population.x[sel]
    z_w = cfg.weights @ population.z[sel]
    if not np.all(np.isfinite(new_mean)):
        raise NumericalError("non-finite mean after recombination",
                             {"t": es.t, "sigma": es.sigma, "mean": es.mean.tolist()})
    cs, cc, mu_w = cfg.c_sigma, cfg.c_c, cfg.mu_w
    es.p_sigma = (1.0 - cs) * es.p_sigma + math.sqrt(cs * (2.0 - cs) * mu_w) * z_w
    es.p_c = (1.0 - cc) * es.p_c + math.sqrt(cc * (2.0 - cc) * mu_w) * (es.A @ z_w)
    v = es.A_inv @ es.p_c
    es.A, es.A_inv = rank_one_factor_update(es.A, es.A_inv, es.p_c, v, cfg.c1)
    es.sigma *= math.exp(cs / cfg.d_sigma * (np.linalg.norm(es.p_sigma) / cfg.chi_n - 1.0))
    es.mean = new_mean
    es.t += 1
    es.evaluations += cfg.lam
    best = int(order[0])
    if f[best] < es.best_f:
        es.best_f = float(f[best])
        es.best_x = population.x[best].copy()
