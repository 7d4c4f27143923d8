"""Limited-memory CMA-ES for large scale derivative-free optimization."""

__version__ = "0.1.0"

from .bench import BenchmarkProblem, evaluate, make_problem, make_rotation  # noqa: E402
from .lmfactor import FactorStore  # noqa: E402
from .optimizer import LMCMA, CholeskyCMAES, CholeskyConfig, OptimizerConfig, optimize  # noqa: E402
from .rng import RandomSource  # noqa: E402

__all__ = [
    "BenchmarkProblem",
    "CholeskyCMAES",
    "CholeskyConfig",
    "FactorStore",
    "LMCMA",
    "OptimizerConfig",
    "RandomSource",
    "evaluate",
    "make_problem",
    "make_rotation",
    "optimize",
]
