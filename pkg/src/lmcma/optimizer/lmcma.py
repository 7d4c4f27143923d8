"""The (mu/mu_w, lambda)-LM-CMA behind an ask/tell interface."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .._kernels import ask_kernel
from ..exceptions import NumericalError
from ..lmfactor import FactorStore
from ..psr import PsrState, psr_update
from ..rng import RandomSource
from ..selection import update_set
from .config import OptimizerConfig

CHECKPOINT_FORMAT = "lmcma-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class Population:
    """One generation of candidates.

    ``z`` holds the sign pre-images (the mirrored partner of candidate
    ``2i`` stores ``-z``); ``m_star`` the subset size each was sampled with.
    """

    x: np.ndarray
    z: np.ndarray
    m_star: np.ndarray
    mean: np.ndarray
    sigma: float
    fitness: np.ndarray | None = None

    def __len__(self):
        return self.x.shape[0]


class LMCMA:
    """Limited-memory CMA with Rademacher pre-images and mirrored sampling.

    Args:
        config: hyperparameters; ``config.n`` fixes the dimension.
        mean: initial search point.
        sigma: initial step-size.
        seed: seed of a fresh random source, ignored when ``rng`` is given.
        rng: shared random source (e.g. across restarts).

    Randomness is consumed per sampled candidate in a fixed order: one
    Gaussian for the subset size, then ``n`` signs for the pre-image.
    """

    def __init__(self, config: OptimizerConfig, mean, sigma: float, seed: int = 0,
                 rng: RandomSource | None = None):
        mean = np.array(mean, dtype=float)
        if mean.shape != (config.n,):
            raise ValueError(f"mean must have length {config.n}, got shape {mean.shape}")
        if not sigma > 0:
            raise ValueError("sigma must be positive")
        self.config = config
        self.mean = mean
        self.sigma = float(sigma)
        self.p_c = np.zeros(config.n)
        self.store = FactorStore(config.n, config.m, config.c1)
        self.psr = PsrState(config.c_sigma, config.z_star, config.d_sigma)
        self.params = config.selection
        self.t = 0
        self.evaluations = 0
        self.best_x: np.ndarray | None = None
        self.best_f = math.inf
        self.rng = rng if rng is not None else RandomSource(seed)

    @property
    def n(self) -> int:
        return self.config.n

    def ask(self) -> Population:
        cfg, store = self.config, self.store
        lam = cfg.lam
        # compiled equivalent of select_subset(k=2r) then rademacher_vector per candidate
        x, z, m_star = ask_kernel(self.rng.generator, self.mean, self.sigma, self.params.m_sigma,
                                  store.count, store.P, store.V, store.b, store.j_array(),
                                  store.a, lam)
        store.dot_count += int(m_star.sum())
        # odd rows are mirrors: pre-image -z, same subset
        z_all = np.repeat(z.astype(np.int8), 2, axis=0)[:lam]
        z_all[1::2] *= -1
        return Population(x, z_all, np.repeat(m_star, 2)[:lam], self.mean.copy(), self.sigma)

    def tell(self, population: Population, fitness=None) -> None:
        """Update mean, evolution path, stored vectors and step-size.

        Ties in fitness are broken by candidate index.
        """
        cfg = self.config
        f = np.array(population.fitness if fitness is None else fitness, dtype=float)
        if f.shape != (cfg.lam,):
            raise ValueError(f"expected {cfg.lam} fitness values, got shape {f.shape}")
        if not np.isfinite(f).all():
            raise ValueError("fitness values must be finite")
        population.fitness = f

        order = np.argsort(f, kind="stable")
        new_mean = cfg.weights @ population.x[order[: cfg.mu]]
        if not np.isfinite(new_mean).all():
            raise NumericalError("non-finite mean after recombination", self._dump())
        c_c = cfg.c_c
        with np.errstate(over="ignore", invalid="ignore"):
            self.p_c = (1.0 - c_c) * self.p_c + (
                math.sqrt(c_c * (2.0 - c_c)) * math.sqrt(cfg.mu_w) * (new_mean - self.mean) / self.sigma
            )
        if not np.isfinite(self.p_c).all():
            # e.g. sigma underflow on a plateau amplifies rounding in the mean
            raise NumericalError("non-finite evolution path", self._dump())
        if self.t % cfg.period == 0:
            _, start = update_set(self.params, self.store, self.t, self.p_c)
            self.store.update_inverses(start)
        self.sigma = psr_update(self.psr, f, self.sigma)
        self.mean = new_mean
        self.t += 1
        self.evaluations += cfg.lam
        best = int(order[0])
        if f[best] < self.best_f:
            self.best_f = float(f[best])
            self.best_x = population.x[best].copy()

    def _dump(self) -> dict:
        return {"t": self.t, "sigma": self.sigma, "mean": self.mean.tolist(),
                "p_c": self.p_c.tolist(), "psr_s": self.psr.s}

    def to_dict(self) -> dict:
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": self.config.to_dict(),
            "mean": self.mean.tolist(),
            "sigma": self.sigma,
            "p_c": self.p_c.tolist(),
            "store": self.store.to_dict(),
            "psr": self.psr.to_dict(),
            "t": self.t,
            "evaluations": self.evaluations,
            "best_x": None if self.best_x is None else self.best_x.tolist(),
            "best_f": self.best_f,
            "rng": self.rng.get_state(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LMCMA":
        if data.get("format") != CHECKPOINT_FORMAT or data.get("version") != CHECKPOINT_VERSION:
            raise ValueError("not an LM-CMA checkpoint of a supported version")
        config = OptimizerConfig.from_dict(data["config"])
        es = cls(config, data["mean"], data["sigma"], rng=RandomSource.from_state(data["rng"]))
        es.p_c = np.array(data["p_c"], dtype=float)
        es.store = FactorStore.from_dict(data["store"])
        es.psr = PsrState.from_dict(data["psr"])
        es.t = data["t"]
        es.evaluations = data["evaluations"]
        es.best_x = None if data["best_x"] is None else np.array(data["best_x"], dtype=float)
        es.best_f = float(data["best_f"])
        return es

    def save_checkpoint(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh)

    @classmethod
    def load_checkpoint(cls, path) -> "LMCMA":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))
