"""Agglomerative clustering of a layer's filters under Ward's linkage.

A layer's filters are clustered bottom-up: every filter starts as its own
cluster and the pair whose merge least increases the within-cluster sum of
squared deviations is joined, repeatedly, until one cluster remains. The
resulting dendrogram can be cut at any cluster count K, and cuts are nested:
the partition at K-1 is the partition at K with one extra merge applied.

Node ids follow the usual linkage convention: leaves are 0..n-1, the t-th
merge creates node n+t. Exact cost ties are broken toward the
lexicographically smallest (left, right) id pair, which makes the whole
procedure deterministic and order-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .container import FilterMatrix
from .errors import KOutOfRangeError


@dataclass
class Merge:
    """One agglomeration step: nodes `left` and `right` joined at `cost`."""

    left: int
    right: int
    cost: float
    new_size: int


@dataclass
class Dendrogram:
    """Full merge history for one layer; n_leaves - 1 merges."""

    merges: list[Merge]
    n_leaves: int

    def to_dict(self) -> dict:
        return {
            "n_leaves": self.n_leaves,
            "merges": [
                {
                    "left": m.left,
                    "right": m.right,
                    "cost": m.cost,
                    "new_size": m.new_size,
                }
                for m in self.merges
            ],
        }


@dataclass
class ClusterAssignment:
    """Labels in canonical form: contiguous 0..k-1, numbered by smallest member."""

    labels: np.ndarray
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)

    def members(self, cluster: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)


def pairwise_sq_distances(filters: FilterMatrix) -> np.ndarray:
    """Symmetric matrix of squared Euclidean distances between filters."""
    return kernels.pairwise_sq_dists(filters.rows)


def ward_merge_cost(size_a, centroid_a, size_b, centroid_b) -> float:
    """Increase in within-cluster squared deviation from merging two clusters.

    Equals (|A||B| / (|A|+|B|)) * ||mean_A - mean_B||^2.
    """
    ca = np.asarray(centroid_a, dtype=np.float64)
    cb = np.asarray(centroid_b, dtype=np.float64)
    diff = ca - cb
    return float(size_a * size_b * np.dot(diff, diff) / (size_a + size_b))


def agglomerate(filters: FilterMatrix) -> Dendrogram:
    """Cluster filters bottom-up, always merging the cheapest pair."""
    dend, _ = agglomerate_with_distances(filters)
    return dend


def agglomerate_with_distances(filters: FilterMatrix) -> tuple[Dendrogram, np.ndarray]:
    """agglomerate(), also returning the squared-distance matrix it used."""
    dsq = kernels.pairwise_sq_dists(filters.rows)
    merges, costs, new_sizes = kernels.ward_linkage(dsq)
    dend = Dendrogram(
        merges=[
            Merge(int(merges[t, 0]), int(merges[t, 1]), float(costs[t]), int(new_sizes[t]))
            for t in range(merges.shape[0])
        ],
        n_leaves=filters.n_filters,
    )
    return dend, dsq


def cut(dendrogram: Dendrogram, k: int) -> ClusterAssignment:
    """Partition the leaves into k clusters by undoing the last k-1 merges.

    Labels are canonical: clusters are numbered 0..k-1 in order of their
    smallest leaf index.
    """
    n = dendrogram.n_leaves
    if not 1 <= k <= n:
        raise KOutOfRangeError(f"k={k} outside [1, {n}]")
    parent = np.arange(n, dtype=np.int64)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    leaf_of_node = {i: i for i in range(n)}  # node id -> one member leaf
    for t in range(n - k):
        m = dendrogram.merges[t]
        ra, rb = find(leaf_of_node[m.left]), find(leaf_of_node[m.right])
        parent[rb] = ra
        leaf_of_node[n + t] = ra
    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    order = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        if roots[i] not in order:
            order[roots[i]] = len(order)
        labels[i] = order[roots[i]]
    return ClusterAssignment(labels=labels, k=k)


def nested_cut_schedule(dendrogram: Dendrogram, k_min: int, k_max: int):
    """Describe how the k_max-cut coarsens into the k_min-cut, one merge at a time.

    Returns (assignment, merge_dst, merge_src): the canonical assignment at
    k_max plus, for each K from k_max down to k_min+1, the pair of cluster
    slots whose union takes K to K-1 (src folds into dst, dst < src).
    """
    n = dendrogram.n_leaves
    if not 1 <= k_min <= k_max <= n:
        raise KOutOfRangeError(f"range [{k_min}, {k_max}] outside [1, {n}]")
    assignment = cut(dendrogram, k_max)

    parent = {}
    for t in range(n - k_max):
        m = dendrogram.merges[t]
        parent[m.left] = parent[m.right] = n + t

    def root(x):
        while x in parent:
            x = parent[x]
        return x

    slot_of = {}
    for leaf in range(n):
        slot_of[root(leaf)] = int(assignment.labels[leaf])

    merge_dst = np.empty(k_max - k_min, dtype=np.int64)
    merge_src = np.empty(k_max - k_min, dtype=np.int64)
    for step, t in enumerate(range(n - k_max, n - k_min)):
        m = dendrogram.merges[t]
        a, b = slot_of.pop(m.left), slot_of.pop(m.right)
        dst, src = (a, b) if a < b else (b, a)
        merge_dst[step] = dst
        merge_src[step] = src
        slot_of[n + t] = dst
    return assignment, merge_dst, merge_src
