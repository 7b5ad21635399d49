"""Sinkhorn and exact optimal transport distances between histograms.

Histograms are 1-D float arrays summing to one; cost matrices are square
float arrays satisfying the metric axioms.
"""

from ._core import (
    AlphaSolveReport,
    EmdSolution,
    FormatError,
    IoError,
    NumericError,
    SinkhornResult,
    SolverError,
    baseline_distance,
    emd,
    entropy,
    grid_euclidean_metric,
    independence_kernel_distance,
    median_normalize,
    normalize,
    power_transform,
    random_points_metric,
    sample_simplex,
    sinkhorn,
    sinkhorn_alpha,
    sinkhorn_batch,
    sinkhorn_plan,
)

__all__ = [
    "AlphaSolveReport",
    "EmdSolution",
    "FormatError",
    "IoError",
    "NumericError",
    "SinkhornResult",
    "SolverError",
    "baseline_distance",
    "emd",
    "entropy",
    "grid_euclidean_metric",
    "independence_kernel_distance",
    "median_normalize",
    "normalize",
    "power_transform",
    "random_points_metric",
    "sample_simplex",
    "sinkhorn",
    "sinkhorn_alpha",
    "sinkhorn_batch",
    "sinkhorn_plan",
]
