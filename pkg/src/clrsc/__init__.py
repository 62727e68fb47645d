"""Collaborative low-rank subspace clustering and its LRR / MLAP baselines."""

from .datagen import MultiViewDataset, add_noise_at_psnr, gen_semisynthetic, gen_synthetic, standin_library
from .errors import ContractViolation, DataError, NumericalFailure
from .metrics import coeff_difference, psnr, sca
from .numerics import RngStream
from .prox import prox_l12_columns, svt
from .solvers import CoefficientStack, SolverConfig, solve_clrsc, solve_lrr, solve_mlap
from .spectral import ClusterAssignment, cluster, fuse_affinity

__version__ = "0.1.0"

__all__ = [
    "ClusterAssignment",
    "CoefficientStack",
    "ContractViolation",
    "DataError",
    "MultiViewDataset",
    "NumericalFailure",
    "RngStream",
    "SolverConfig",
    "add_noise_at_psnr",
    "cluster",
    "coeff_difference",
    "fuse_affinity",
    "gen_semisynthetic",
    "gen_synthetic",
    "prox_l12_columns",
    "psnr",
    "sca",
    "solve_clrsc",
    "solve_lrr",
    "solve_mlap",
    "standin_library",
    "svt",
]
