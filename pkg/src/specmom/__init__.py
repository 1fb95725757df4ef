"""Outlier- and heavy-tail-robust linear regression via spectral
median-of-means descent, with baselines, synthetic benchmarks and
Monte-Carlo diagnostics."""

from .blocks import BlockPartition, BlockVectors, Dataset, block_statistics, partition_blocks, prune
from .datagen import AttackKind, GenSpec, contaminate, generate, generate_clean, second_moment_matrix
from .descent import (
    DescentConfig,
    DescentTrace,
    ProblemSpec,
    descent_direction,
    robust_regression,
    step_size,
)
from .direction import DirectionResult, bregman_regression, kl_project_capped, round_directions
from .linalg import inv_sqrt_psd, power_method

__all__ = [
    "AttackKind",
    "BlockPartition",
    "BlockVectors",
    "Dataset",
    "DescentConfig",
    "DescentTrace",
    "DirectionResult",
    "GenSpec",
    "ProblemSpec",
    "block_statistics",
    "bregman_regression",
    "contaminate",
    "descent_direction",
    "generate",
    "generate_clean",
    "inv_sqrt_psd",
    "kl_project_capped",
    "partition_blocks",
    "power_method",
    "prune",
    "robust_regression",
    "round_directions",
    "second_moment_matrix",
    "step_size",
]

__version__ = "0.1.0"
