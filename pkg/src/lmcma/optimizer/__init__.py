from .cholcma import CholeskyCMAES, cholesky_cma_step, rank_one_factor_update
from .config import CholeskyConfig, OptimizerConfig, recombination_weights
from .driver import ALGORITHMS, optimize, stagnation_window
from .lmcma import LMCMA, Population

__all__ = [
    "ALGORITHMS",
    "CholeskyCMAES",
    "CholeskyConfig",
    "LMCMA",
    "OptimizerConfig",
    "Population",
    "cholesky_cma_step",
    "optimize",
    "rank_one_factor_update",
    "recombination_weights",
    "stagnation_window",
]
