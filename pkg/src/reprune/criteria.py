"""Baseline filter-selection criteria for comparison harnesses.

Three classic magnitude-style rules, each selecting a prescribed number of
filters per layer: keep the largest l1 norms, the largest l2 norms, or the
filters farthest from the layer's geometric median (the median-adjacent ones
being the most redundant). The representative-election criterion also appears
in the enumeration so plans can record their provenance, but it decides its
own keep counts and cannot be driven by one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .container import FilterMatrix
from .errors import KeepOutOfRangeError, WeiszfeldNonConvergence

KINDS = ("reprune", "l1", "l2", "geometric_median")


@dataclass
class Criterion:
    """A named selection rule plus its numeric parameters."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown criterion {self.kind!r}, expected one of {KINDS}")


def norm_scores(filters: FilterMatrix, p: int) -> np.ndarray:
    """Per-filter lp norm, p in {1, 2}."""
    if p == 1:
        return np.abs(filters.rows).sum(axis=1)
    if p == 2:
        return np.sqrt(np.einsum("ij,ij->i", filters.rows, filters.rows))
    raise ValueError(f"p must be 1 or 2, got {p}")


def geometric_median(
    filters: FilterMatrix, tol: float = 1e-8, max_iter: int = 1000
) -> np.ndarray:
    """Point minimizing the summed Euclidean distance to all filters.

    Weiszfeld iteration started at the centroid. If an iterate lands on a
    data point (within 1e-12) that point is returned, sidestepping the
    division by zero. Raises WeiszfeldNonConvergence, carrying the last
    iterate, if the step norm never falls below tol within max_iter.
    """
    rows = filters.rows
    x = rows.mean(axis=0)
    for _ in range(max_iter):
        diff = rows - x
        dists = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        hit = np.flatnonzero(dists < 1e-12)
        if hit.size:
            return rows[hit[0]].copy()
        w = 1.0 / dists
        x_new = (rows * w[:, None]).sum(axis=0) / w.sum()
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        if step < tol:
            return x
    raise WeiszfeldNonConvergence(
        f"no convergence within {max_iter} iterations", last_iterate=x
    )


def median_distances(filters: FilterMatrix, tol: float = 1e-8, max_iter: int = 1000) -> np.ndarray:
    """Euclidean distance of every filter from the layer's geometric median."""
    gm = geometric_median(filters, tol=tol, max_iter=max_iter)
    diff = filters.rows - gm
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def select_by_criterion(
    filters: FilterMatrix, criterion: Criterion, keep: int
) -> list[int]:
    """Indices of the `keep` filters the criterion ranks most worth keeping.

    Scores rank descending; ties go to the lowest index; the result is sorted
    ascending.
    """
    n = filters.n_filters
    if not 1 <= keep <= n:
        raise KeepOutOfRangeError(f"keep={keep} outside [1, {n}]")
    if criterion.kind == "l1":
        scores = norm_scores(filters, 1)
    elif criterion.kind == "l2":
        scores = norm_scores(filters, 2)
    elif criterion.kind == "geometric_median":
        scores = median_distances(
            filters,
            tol=float(criterion.params.get("tol", 1e-8)),
            max_iter=int(criterion.params.get("max_iter", 1000)),
        )
    else:
        raise ValueError(
            "the representative-election criterion decides its own keep counts; "
            "use elect_layer"
        )
    order = np.argsort(-scores, kind="stable")
    return sorted(int(i) for i in order[:keep])
