"""Run trajectories and their CSV/JSON serialization."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

CSV_HEADER = ("evals", "best_f", "sigma", "ms")


@dataclass
class RunRecord:
    """Outcome of one optimization run.

    ``rows`` hold ``(evals, best_f, sigma, ms)`` per generation; ``ms`` is
    ``None`` unless wall-clock recording was requested, so that default
    outputs are deterministic.
    """

    metadata: dict
    rows: list = field(default_factory=list)
    reason: str = ""
    evaluations: int = 0
    best_f: float = math.inf
    best_x: list | None = None
    restarts: int = 0
    target_f: float | None = None

    @property
    def success(self) -> bool:
        return self.target_f is not None and self.best_f <= self.target_f

    def append(self, evals: int, best_f: float, sigma: float, ms: float | None = None) -> None:
        self.rows.append((evals, best_f, sigma, ms))

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for evals, best_f, sigma, ms in self.rows:
                w.writerow((evals, repr(best_f), repr(sigma), "" if ms is None else f"{ms:.3f}"))

    def summary(self) -> dict:
        return {
            "reason": self.reason,
            "evaluations": self.evaluations,
            "best_f": self.best_f,
            "success": self.success,
            "restarts": self.restarts,
        }

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata, **self.summary()}, indent=2, sort_keys=True)


def read_csv(path) -> list[tuple]:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [(int(e), float(f), float(s), float(ms) if ms else None) for e, f, s, ms in r]
