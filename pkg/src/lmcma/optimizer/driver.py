"""Run an optimizer on a benchmark problem until target, budget or stagnation."""

from __future__ import annotations

import math
import time

from .. import __version__
from ..bench import BenchmarkProblem, evaluate_batch
from ..records import RunRecord
from ..rng import RandomSource
from .cholcma import CholeskyCMAES
from .config import CholeskyConfig, OptimizerConfig
from .lmcma import LMCMA

ALGORITHMS = ("lmcma", "cholcma")

STAGNATION_TOL = 1e-12


def stagnation_window(n: int, lam: int) -> int:
    """Generations without relative best-f progress before a run is declared stuck."""
    return int(math.ceil(10.0 * (n / lam + 10.0)))


def make_optimizer(algorithm: str, config, mean, sigma: float, rng: RandomSource):
    if algorithm == "lmcma":
        return LMCMA(config, mean, sigma, rng=rng)
    if algorithm == "cholcma":
        return CholeskyCMAES(config, mean, sigma, rng=rng)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def optimize(config: OptimizerConfig | CholeskyConfig, problem: BenchmarkProblem, budget: int,
             target_f: float | None = None, seed: int = 0, algorithm: str = "lmcma",
             restarts: bool | None = None, record_time: bool = False,
             on_generation=None) -> RunRecord:
    """Minimize ``problem`` with ask/evaluate/tell cycles.

    The initial mean is uniform in the problem's init box and the initial
    step-size is ``problem.sigma0``; both are redrawn/reset on a restart.
    Termination reasons are ``"target"``, ``"budget"`` and ``"stagnation"``.

    Args:
        budget: maximum number of evaluations; a generation only starts if
            it fits entirely.
        target_f: defaults to ``problem.target_f``.
        restarts: defaults to ``config.restarts`` (LM-CMA) or False.
        on_generation: optional callback ``(optimizer, record)`` after each tell.
    """
    if config.n != problem.dimension:
        raise ValueError(f"config is for n={config.n}, problem has n={problem.dimension}")
    if budget < config.lam:
        raise ValueError(f"budget {budget} is smaller than one generation ({config.lam})")
    if target_f is None:
        target_f = problem.target_f
    if restarts is None:
        restarts = bool(getattr(config, "restarts", False))

    rng = RandomSource(seed)
    n, lam = config.n, config.lam
    record = RunRecord(
        metadata={
            "algorithm": algorithm,
            "preset": getattr(config, "preset", "default"),
            "problem": problem.metadata(),
            "n": n,
            "seed": seed,
            "budget": budget,
            "restarts_enabled": restarts,
            "config": config.to_dict(),
            "version": __version__,
        },
        target_f=target_f,
    )
    window = stagnation_window(n, lam)
    t0 = time.perf_counter()
    evals = 0
    best_f, best_x = math.inf, None

    def start():
        mean = rng.uniform_vector(problem.init_lower, problem.init_upper, n)
        return make_optimizer(algorithm, config, mean, problem.sigma0, rng)

    es = start()
    last_progress_gen, ref_f, gen = 0, math.inf, 0
    reason = "budget"
    while evals + lam <= budget:
        pop = es.ask()
        fit = evaluate_batch(problem, pop.x)
        es.tell(pop, fit)
        evals += lam
        gen += 1
        if es.best_f < best_f:
            best_f, best_x = es.best_f, es.best_x
        ms = (time.perf_counter() - t0) * 1e3 if record_time else None
        record.append(evals, best_f, es.sigma, ms)
        if on_generation is not None:
            on_generation(es, record)
        if best_f <= target_f:
            reason = "target"
            break
        if es.best_f < ref_f - STAGNATION_TOL * abs(ref_f) or ref_f == math.inf:
            ref_f, last_progress_gen = es.best_f, gen
        elif gen - last_progress_gen >= window:
            if not restarts:
                reason = "stagnation"
                break
            record.restarts += 1
            es = start()
            ref_f, last_progress_gen = math.inf, gen

    record.reason = reason
    record.evaluations = evals
    record.best_f = best_f
    record.best_x = None if best_x is None else best_x.tolist()
    return record
