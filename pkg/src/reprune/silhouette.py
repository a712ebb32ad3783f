"""Silhouette scoring of a clustering: per filter, per cluster, and layer mean.

Each filter gets a score in [-1, 1] combining cohesion (mean distance to its
own cluster) and separation (smallest mean distance to a foreign cluster).
Distances here are plain Euclidean, unlike the squared form inside the Ward
merge cost. Conventions for the degenerate cases:

  - a filter alone in its cluster scores 0;
  - if cohesion and separation are both 0 (all points coincident) the score
    is 0, since such a filter is neither well nor badly placed;
  - a single-cluster assignment gets an all-zero report, so a model-selection
    argmax can never pick K = 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .container import FilterMatrix
from .errors import SingleClusterError, SingletonClusterError
from .hierarchy import ClusterAssignment


@dataclass
class SilhouetteReport:
    """Scores for one layer at one cluster count."""

    per_filter: np.ndarray
    per_cluster: np.ndarray
    layer_mean: float
    k: int


def _euclidean_matrix(filters: FilterMatrix) -> np.ndarray:
    return np.sqrt(kernels.pairwise_sq_dists(filters.rows))


def cohesion(filters: FilterMatrix, assignment: ClusterAssignment, j: int) -> float:
    """Mean distance from filter j to the other members of its cluster."""
    members = assignment.members(int(assignment.labels[j]))
    if members.size < 2:
        raise SingletonClusterError(
            f"filter {j} is alone in its cluster; cohesion is undefined"
        )
    diff = filters.rows[members] - filters.rows[j]
    dists = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    return float(dists.sum() / (members.size - 1))


def separation(filters: FilterMatrix, assignment: ClusterAssignment, j: int) -> float:
    """Smallest mean distance from filter j to any cluster not containing it."""
    if assignment.k < 2:
        raise SingleClusterError(
            "separation needs at least two clusters"
        )
    own = int(assignment.labels[j])
    best = np.inf
    for c in range(assignment.k):
        if c == own:
            continue
        members = assignment.members(c)
        diff = filters.rows[members] - filters.rows[j]
        mean = float(np.sqrt(np.einsum("ij,ij->i", diff, diff)).mean())
        if mean < best:
            best = mean
    return best


def silhouette_filter(a: float, b: float, cluster_size: int) -> float:
    """Combine cohesion and separation into one score in [-1, 1]."""
    if cluster_size == 1:
        return 0.0
    m = max(a, b)
    if m == 0.0:
        return 0.0
    return (b - a) / m


def silhouette_report(
    filters: FilterMatrix, assignment: ClusterAssignment
) -> SilhouetteReport:
    """Score every filter of a layer under one assignment."""
    return report_from_distances(_euclidean_matrix(filters), assignment)


def report_from_distances(
    deuc: np.ndarray, assignment: ClusterAssignment
) -> SilhouetteReport:
    """silhouette_report on a precomputed Euclidean distance matrix."""
    n = deuc.shape[0]
    k = assignment.k
    labels = assignment.labels
    if k < 2:
        return SilhouetteReport(
            per_filter=np.zeros(n),
            per_cluster=np.zeros(k),
            layer_mean=0.0,
            k=k,
        )

    sizes = assignment.sizes().astype(np.float64)
    sums = np.zeros((n, k))
    for c in range(k):
        sums[:, c] = deuc[:, labels == c].sum(axis=1)

    idx = np.arange(n)
    own = sums[idx, labels]
    size_own = sizes[labels]
    a = own / np.maximum(size_own - 1.0, 1.0)
    ratios = sums / sizes
    ratios[idx, labels] = np.inf
    b = ratios.min(axis=1)
    denom = np.maximum(a, b)
    per_filter = np.where(denom > 0.0, (b - a) / np.where(denom > 0.0, denom, 1.0), 0.0)
    per_filter = np.where(size_own == 1.0, 0.0, per_filter)

    per_cluster = np.array([per_filter[labels == c].mean() for c in range(k)])
    return SilhouetteReport(
        per_filter=per_filter,
        per_cluster=per_cluster,
        layer_mean=float(per_filter.mean()),
        k=k,
    )
