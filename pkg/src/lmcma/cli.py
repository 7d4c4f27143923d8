"""Command line entry point: ``lmcma --function elli --dim 128 --runs 11 --out results``.

A ``key=value`` config file may be given with ``--config``; keys are the
long flag names without dashes (``rotation-seed`` and ``rotation_seed``
are both accepted). Command line flags override the file.

Exit status is 0 when the batch completed (whatever the runs' outcome)
and 2 on a specification error.
"""

from __future__ import annotations

import argparse
import sys

from .bench import FUNCTION_IDS
from .harness import Cell, ExperimentSpec, run_experiment
from .optimizer import ALGORITHMS
from .optimizer.config import PRESETS

EXIT_OK = 0
EXIT_SPEC_ERROR = 2

# option name -> (converter, default)
OPTIONS = {
    "algo": (str, "lmcma"),
    "function": (str, "sphere"),
    "dim": (int, 10),
    "m": (str, None),
    "lambda": (int, None),
    "sigma0": (float, None),
    "seed": (int, 0),
    "runs": (int, 1),
    "budget": (int, None),
    "target": (float, 1e-10),
    "preset": (str, "default"),
    "rotation_seed": (int, 0),
    "out": (str, None),
    "emit_eigenspectrum": (None, False),
    "workers": (int, 1),
}


class SpecError(ValueError):
    pass


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise SpecError(f"not a boolean: {text!r}")


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SpecError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in OPTIONS:
                raise SpecError(f"{path}:{lineno}: unknown key {key!r}")
            conv = OPTIONS[key][0]
            try:
                values[key] = _parse_bool(value) if conv is None else conv(value)
            except ValueError as exc:
                raise SpecError(f"{path}:{lineno}: {exc}") from None
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lmcma", description="Run LM-CMA / Cholesky-CMA-ES benchmark experiments.")
    # defaults are None so that file values can be told apart from flags
    p.add_argument("--algo", choices=ALGORITHMS)
    p.add_argument("--function", choices=FUNCTION_IDS)
    p.add_argument("--dim", type=int, help="problem dimension n")
    p.add_argument("--m", help='number of stored vectors: an integer or "2sqrt"')
    p.add_argument("--lambda", dest="lambda", type=int, help="population size")
    p.add_argument("--sigma0", type=float, help="initial step-size (default 3)")
    p.add_argument("--seed", type=int, help="base seed; run r uses seed + r")
    p.add_argument("--runs", type=int, help="number of runs")
    p.add_argument("--budget", type=int, help="evaluations per run (default 10^4 n)")
    p.add_argument("--target", type=float, help="target f value (default 1e-10)")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--rotation-seed", dest="rotation_seed", type=int)
    p.add_argument("--out", help="output directory for CSV and JSON files")
    p.add_argument("--emit-eigenspectrum", dest="emit_eigenspectrum", action="store_const", const=True,
                   help="write the final eigenvalues of A A^T per run")
    p.add_argument("--workers", type=int, help="parallel worker processes")
    p.add_argument("--config", help="key=value file; flags override it")
    return p


def resolve_options(args: argparse.Namespace) -> dict:
    values = {k: default for k, (_, default) in OPTIONS.items()}
    if args.config:
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise SpecError(f"cannot read config file: {exc}") from None
    for key in OPTIONS:
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if values["algo"] not in ALGORITHMS:
        raise SpecError(f"unknown algorithm {values['algo']!r}")
    if values["function"] not in FUNCTION_IDS:
        raise SpecError(f"unknown function {values['function']!r}")
    if values["preset"] not in PRESETS:
        raise SpecError(f"unknown preset {values['preset']!r}")
    m = values["m"]
    if m is not None and m != "2sqrt":
        try:
            values["m"] = int(m)
        except ValueError:
            raise SpecError(f'--m must be an integer or "2sqrt", got {m!r}') from None
    return values


def cell_from_options(v: dict) -> Cell:
    return Cell(
        algorithm=v["algo"], function_id=v["function"], n=v["dim"], budget=v["budget"],
        target=v["target"], runs=v["runs"], base_seed=v["seed"], m=v["m"], lam=v["lambda"],
        preset=v["preset"], sigma0=v["sigma0"], rotation_seed=v["rotation_seed"],
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC_ERROR
    try:
        values = resolve_options(args)
        spec = ExperimentSpec([cell_from_options(values)], out_dir=values["out"],
                              workers=values["workers"],
                              emit_eigenspectrum=values["emit_eigenspectrum"])
        results = run_experiment(spec)
    except (ValueError, OSError) as exc:
        print(f"lmcma: error: {exc}", file=sys.stderr)
        return EXIT_SPEC_ERROR
    for res in results:
        s = res.summary
        print(f"{res.cell.name}: runs={s['n_runs']} success_rate={s['success_rate']:.3f} "
              f"median_evals={s['median_evals']}{' (censored)' if s['censored'] else ''}")
        for run in s["runs"]:
            if run["error"]:
                print(f"  seed {run['seed']}: {run['error']}", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
