"""Per-layer representative election.

For one conv layer: build a single Ward dendrogram of its filters, score
every cluster count K in [k_min, k_max] by layer-mean silhouette, cut at the
best K, drop clusters whose mean member silhouette is negative, and keep the
member nearest each surviving cluster's centroid. The kept indices are the
layer's pruning decision; everything else is recorded for diagnostics.

The K search reuses one dendrogram across all cuts (cuts are nested), so the
whole sweep costs one linkage plus one pass over the merge schedule instead
of a clustering run per K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .container import FilterMatrix, filters_of
from .errors import KOutOfRangeError, UnknownClusterError
from .hierarchy import (
    ClusterAssignment,
    agglomerate_with_distances,
    cut,
    nested_cut_schedule,
)
from .silhouette import report_from_distances

# guards the floor against cases like 10 * 0.3 -> 2.9999999999999996
_FLOOR_EPS = 1e-9


@dataclass
class ElectionConfig:
    """Knobs for the K search. `lam` is the minimum cluster rate."""

    lam: float = 0.1
    k_min_floor: int = 2

    def __post_init__(self):
        if not 0.0 < self.lam <= 1.0:
            raise ValueError(f"lam must be in (0, 1], got {self.lam}")
        if self.k_min_floor < 1:
            raise ValueError("k_min_floor must be at least 1")


@dataclass
class LayerElection:
    """Outcome of electing one layer's representatives."""

    k_star: int
    assignment: ClusterAssignment
    kept: list[int]
    dropped_clusters: list[int]
    silhouette_by_k: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "k_star": self.k_star,
            "kept": list(self.kept),
            "dropped_clusters": list(self.dropped_clusters),
            "labels": self.assignment.labels.tolist(),
            "silhouette_by_k": {str(k): v for k, v in self.silhouette_by_k.items()},
        }


def k_range(n_out: int, config: ElectionConfig) -> tuple[int, int]:
    """Admissible cluster-count range for a layer of n_out filters."""
    if n_out < 2:
        raise KOutOfRangeError(f"need at least 2 filters, got {n_out}")
    k_max = n_out - 1
    k_min = max(int(math.floor(n_out * config.lam + _FLOOR_EPS)), config.k_min_floor)
    k_min = min(k_min, k_max)
    return k_min, k_max


def _search(filters: FilterMatrix, config: ElectionConfig):
    """One dendrogram, one silhouette sweep; shared by select_k and elect_layer."""
    k_min, k_max = k_range(filters.n_filters, config)
    dend, dsq = agglomerate_with_distances(filters)
    start, merge_dst, merge_src = nested_cut_schedule(dend, k_min, k_max)
    deuc = np.sqrt(dsq)
    means = kernels.silhouette_sweep(
        deuc, start.labels, start.sizes(), merge_dst, merge_src
    )
    # means[i] scores K = k_max - i; present the trace in ascending K
    trace = {k: float(means[k_max - k]) for k in range(k_min, k_max + 1)}
    k_star = k_min
    best = trace[k_min]
    for k in range(k_min + 1, k_max + 1):
        if trace[k] > best:
            best = trace[k]
            k_star = k
    return k_star, trace, dend, deuc


def select_k(filters: FilterMatrix, config: ElectionConfig) -> tuple[int, dict[int, float]]:
    """Pick the cluster count with the best layer-mean silhouette.

    Ties go to the smallest K. Returns (k_star, {K: layer_mean}).
    """
    k_star, trace, _, _ = _search(filters, config)
    return k_star, trace


def cluster_centroid(
    filters: FilterMatrix, assignment: ClusterAssignment, cluster: int
) -> np.ndarray:
    """Arithmetic mean of the cluster's member filters."""
    if not 0 <= cluster < assignment.k:
        raise UnknownClusterError(f"cluster {cluster} outside 0..{assignment.k - 1}")
    members = assignment.members(cluster)
    return filters.rows[members].mean(axis=0)


def elect_representative(
    filters: FilterMatrix, assignment: ClusterAssignment, cluster: int
) -> int:
    """Member filter nearest the cluster centroid; ties go to the lowest index."""
    if not 0 <= cluster < assignment.k:
        raise UnknownClusterError(f"cluster {cluster} outside 0..{assignment.k - 1}")
    members = assignment.members(cluster)
    if len(members) <= 2:
        # both members of a pair are equidistant from their midpoint, so the
        # tie rule decides; computing the rounded distances instead would let
        # last-ulp noise pick the winner
        return int(members[0])
    centroid = cluster_centroid(filters, assignment, cluster)
    diff = filters.rows[members] - centroid
    dists = np.einsum("ij,ij->i", diff, diff)
    return int(members[int(np.argmin(dists))])


def elect_layer(filters: FilterMatrix, config: ElectionConfig) -> LayerElection:
    """Full election for one layer: K search, cluster filtering, representatives.

    Clusters with negative mean silhouette are dropped. If that would drop
    every cluster, the best-scoring cluster is kept anyway -- a layer must
    retain at least one filter.
    """
    k_star, trace, dend, deuc = _search(filters, config)
    assignment = cut(dend, k_star)
    report = report_from_distances(deuc, assignment)

    surviving = [c for c in range(k_star) if report.per_cluster[c] >= 0.0]
    if not surviving:
        surviving = [int(np.argmax(report.per_cluster))]
    survivors = set(surviving)
    dropped = [c for c in range(k_star) if c not in survivors]

    kept = sorted(elect_representative(filters, assignment, c) for c in surviving)
    return LayerElection(
        k_star=k_star,
        assignment=assignment,
        kept=kept,
        dropped_clusters=dropped,
        silhouette_by_k=trace,
    )


def elect_model(snapshot, config: ElectionConfig, protected=()) -> dict:
    """Elect every conv layer in a snapshot, keyed by layer name.

    Protected layers and layers with a single filter (nothing to cluster)
    are skipped; plan building keeps those at full width.
    """
    skip = set(protected)
    elections = {}
    for spec in snapshot.conv_layers():
        if spec.name in skip or spec.n_out < 2:
            continue
        elections[spec.name] = elect_layer(filters_of(snapshot, spec.name), config)
    return elections
