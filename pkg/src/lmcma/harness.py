"""Experiment runner: repeated seeded runs, per-run CSVs and per-cell summaries.

Output layout for a cell named ``<cell>``::

    <out>/<cell>_run00.csv        trajectory, header "evals,best_f,sigma,ms"
    <out>/<cell>_run00_eigen.csv  eigenvalues of A A^T at the end (optional)
    <out>/<cell>.json             summary (schema version SUMMARY_SCHEMA)

Runs use seeds ``base_seed + run index``. A run that does not reach the
target counts as ``budget`` evaluations; the summary median is then
flagged ``censored``.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bench import make_problem
from .optimizer import ALGORITHMS, CholeskyConfig, OptimizerConfig, optimize
from .records import RunRecord

SUMMARY_SCHEMA = 1
EIGEN_CAP = 2048


def memory_slots(algorithm: str, n: int, m: int, lam: int) -> int:
    """Number of floating-point slots an optimizer keeps in memory.

    LM-CMA stores ``(2m + lam + 6) n + 5m`` numbers; the dense Cholesky
    baseline stores ``2n^2 + lam n + 3n``.
    """
    if n < 1 or m < 0 or lam < 0:
        raise ValueError(f"invalid sizes n={n}, m={m}, lam={lam}")
    if algorithm == "lmcma":
        return (2 * m + lam + 6) * n + 5 * m
    if algorithm == "cholcma":
        return 2 * n * n + lam * n + 3 * n
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


def build_config(algorithm: str, n: int, preset: str = "default", m=None, lam: int | None = None,
                 **overrides) -> OptimizerConfig | CholeskyConfig:
    """Optimizer configuration for a cell; ``m`` and ``preset`` apply to LM-CMA only."""
    if algorithm == "lmcma":
        return OptimizerConfig(n, lam=lam, m=m, preset=preset, **overrides)
    if algorithm == "cholcma":
        if preset != "default":
            raise ValueError("presets are only defined for lmcma")
        if m is not None:
            raise ValueError("m applies to lmcma only")
        return CholeskyConfig(n, lam=lam, **overrides)
    raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {ALGORITHMS}")


@dataclass(frozen=True)
class Cell:
    """One (algorithm, problem, settings) combination run ``runs`` times."""

    algorithm: str
    function_id: str
    n: int
    budget: int | None = None
    target: float = 1e-10
    runs: int = 11
    base_seed: int = 0
    m: int | str | None = None
    lam: int | None = None
    preset: str = "default"
    sigma0: float | None = None
    rotation_seed: int = 0
    label: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.budget is not None and self.budget < 1:
            raise ValueError("budget must be positive")
        if not self.target > 0:
            raise ValueError("target must be positive")

    @property
    def name(self) -> str:
        if self.label:
            return self.label
        parts = [self.algorithm, self.function_id, f"n{self.n}"]
        if self.m is not None:
            parts.append(f"m{self.m}")
        if self.lam is not None:
            parts.append(f"lam{self.lam}")
        if self.preset != "default":
            parts.append(self.preset)
        return "_".join(parts)

    @property
    def effective_budget(self) -> int:
        # default cap: 10^4 n evaluations
        return self.budget if self.budget is not None else 10_000 * self.n

    def seeds(self) -> list[int]:
        return [self.base_seed + r for r in range(self.runs)]

    def problem(self):
        kw = {"target_f": self.target}
        if self.sigma0 is not None:
            kw["sigma0"] = self.sigma0
        return make_problem(self.function_id, self.n, rotation_seed=self.rotation_seed, **kw)

    def config(self):
        return build_config(self.algorithm, self.n, self.preset, self.m, self.lam)

    def validate(self) -> None:
        """Build the config and problem once so spec errors surface early."""
        config = self.config()
        self.problem()
        if self.effective_budget < config.lam:
            raise ValueError(f"{self.name}: budget {self.effective_budget} is below "
                             f"one generation ({config.lam})")


@dataclass
class ExperimentSpec:
    cells: list[Cell]
    out_dir: str | os.PathLike | None = None
    aggregation: str = "median"
    workers: int = 1
    emit_eigenspectrum: bool = False

    def __post_init__(self):
        if not self.cells:
            raise ValueError("an experiment needs at least one cell")
        if self.aggregation != "median":
            raise ValueError(f"unsupported aggregation {self.aggregation!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        names = [c.name for c in self.cells]
        if len(set(names)) != len(names):
            raise ValueError("cell names must be unique; set Cell.label to disambiguate")


@dataclass
class RunOutcome:
    seed: int
    record: RunRecord | None
    error: str | None = None
    eigenvalues: list | None = None

    @property
    def success(self) -> bool:
        return self.record is not None and self.record.success


@dataclass
class CellResult:
    cell: Cell
    outcomes: list[RunOutcome]
    summary: dict = field(default_factory=dict)


def lower_median(values):
    """Lower-middle order statistic; the 6th of 11 values."""
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def summarize(cell: Cell, outcomes: list[RunOutcome]) -> dict:
    """Median evaluations-to-target and success rate of a cell.

    Unsuccessful runs enter the median as ``budget`` and sort after every
    successful run; if the median falls on one the value is censored.
    """
    budget = cell.effective_budget
    keyed = []
    runs = []
    for o in outcomes:
        rec = o.record
        ok = o.success
        value = rec.evaluations if ok else budget
        keyed.append((value, not ok))
        runs.append({
            "seed": o.seed,
            "success": ok,
            "evaluations": None if rec is None else rec.evaluations,
            "best_f": None if rec is None else _json_float(rec.best_f),
            "reason": "error" if rec is None else rec.reason,
            "restarts": None if rec is None else rec.restarts,
            "error": o.error,
        })
    # a failure at value == budget sorts after a success at the same value
    median_value, censored = lower_median(keyed)
    successes = sum(o.success for o in outcomes)
    return {
        "schema_version": SUMMARY_SCHEMA,
        "cell": asdict(cell) | {"name": cell.name, "budget": budget},
        "runs": runs,
        "n_runs": len(outcomes),
        "successes": successes,
        "success_rate": successes / len(outcomes),
        "median_evals": median_value,
        "censored": censored,
        "failures": sum(o.error is not None for o in outcomes),
    }


def _json_float(x: float):
    return x if math.isfinite(x) else None


def run_cell_once(cell: Cell, seed: int, emit_eigenspectrum: bool = False) -> RunOutcome:
    """One seeded run; exceptions are caught and reported in the outcome."""
    last = {}

    def keep(es, _record):
        last["es"] = es

    try:
        record = optimize(cell.config(), cell.problem(), cell.effective_budget,
                          target_f=cell.target, seed=seed, algorithm=cell.algorithm,
                          on_generation=keep if emit_eigenspectrum else None)
    except Exception as exc:  # recorded, the batch goes on
        return RunOutcome(seed, None, f"{type(exc).__name__}: {exc}")
    eig = None
    if emit_eigenspectrum and "es" in last and cell.n <= EIGEN_CAP:
        eig = factor_eigenspectrum(last["es"]).tolist()
    return RunOutcome(seed, record, eigenvalues=eig)


def factor_eigenspectrum(es) -> np.ndarray:
    """Ascending eigenvalues of ``A A^T`` for either optimizer."""
    if hasattr(es, "store"):
        return es.store.eigenspectrum()
    return np.linalg.eigvalsh(es.A @ es.A.T)


def _check_writable(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    # probe so that an unwritable directory fails before any run
    fd, probe = tempfile.mkstemp(dir=out, prefix=".probe")
    os.close(fd)
    os.remove(probe)


def _run_task(args):
    cell, seed, eig = args
    return run_cell_once(cell, seed, eig)


def run_experiment(spec: ExperimentSpec) -> list[CellResult]:
    """Run every cell of ``spec`` and write its outputs.

    Raises:
        ValueError: if a cell is misconfigured (before any run).
        OSError: if the output directory cannot be written (before any run).
    """
    for cell in spec.cells:
        cell.validate()
    out = None if spec.out_dir is None else Path(spec.out_dir)
    if out is not None:
        _check_writable(out)
    tasks = [(cell, seed, spec.emit_eigenspectrum) for cell in spec.cells for seed in cell.seeds()]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            outcomes = list(pool.map(_run_task, tasks))
    else:
        outcomes = [_run_task(t) for t in tasks]

    results = []
    pos = 0
    for cell in spec.cells:
        cell_outcomes = outcomes[pos: pos + cell.runs]
        pos += cell.runs
        result = CellResult(cell, cell_outcomes, summarize(cell, cell_outcomes))
        if out is not None:
            write_cell(out, result)
        results.append(result)
    return results


def write_cell(out: Path, result: CellResult) -> None:
    name = result.cell.name
    for r, o in enumerate(result.outcomes):
        if o.record is not None:
            o.record.write_csv(out / f"{name}_run{r:02d}.csv")
        if o.eigenvalues is not None:
            with open(out / f"{name}_run{r:02d}_eigen.csv", "w") as fh:
                fh.write("index,eigenvalue\n")
                for i, e in enumerate(o.eigenvalues):
                    fh.write(f"{i},{e!r}\n")
    with open(out / f"{name}.json", "w") as fh:
        json.dump(result.summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
