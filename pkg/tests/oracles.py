"""Independent reference implementations used to check the engine.

Everything here recomputes results from first principles with none of the
engine's shortcuts: clustering recomputes centroids from scratch at every
step instead of using the constant-time distance update, silhouettes come
from literal double loops, the geometric median from grid refinement and a
subgradient certificate, and cost totals from a flat pass over layer dicts.
Slow on purpose; correctness is the only goal.
"""

from __future__ import annotations

import numpy as np


def ward_oracle(points):
    """Greedy agglomeration by exhaustive merge-cost recomputation.

    Returns (merges, costs, partitions) where merges are scipy-style node-id
    pairs (leaves 0..n-1, the t-th merge creating node n+t), costs are the
    within-cluster variance increases, and partitions[k] is the set of
    frozenset clusters left when k clusters remain. Ties on cost go to the
    lexicographically smallest (left, right) id pair.
    """
    x = np.asarray(points, dtype=np.float64)
    n = x.shape[0]
    members = [[i] for i in range(n)]
    ids = list(range(n))
    cents = x.copy()
    sizes = np.ones(n)
    merges: list[tuple[int, int]] = []
    costs: list[float] = []
    partitions = {n: {frozenset([i]) for i in range(n)}}
    for t in range(n - 1):
        diff = cents[:, None, :] - cents[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        weight = sizes[:, None] * sizes[None, :] / (sizes[:, None] + sizes[None, :])
        cost = weight * d2
        iu, ju = np.triu_indices(len(members), 1)
        vals = cost[iu, ju]
        best = vals.min()
        key = pick = None
        for c in np.nonzero(vals == best)[0]:
            i, j = int(iu[c]), int(ju[c])
            pair = (min(ids[i], ids[j]), max(ids[i], ids[j]))
            if key is None or pair < key:
                key, pick = pair, (i, j)
        i, j = pick
        merges.append(key)
        costs.append(float(best))
        total = sizes[i] + sizes[j]
        cents[i] = (sizes[i] * cents[i] + sizes[j] * cents[j]) / total
        sizes[i] = total
        members[i] = sorted(members[i] + members[j])
        ids[i] = n + t
        del members[j]
        del ids[j]
        cents = np.delete(cents, j, axis=0)
        sizes = np.delete(sizes, j)
        partitions[n - t - 1] = {frozenset(m) for m in members}
    return merges, costs, partitions


def silhouette_oracle(points, labels):
    """Literal per-point silhouette: mean own-cluster distance vs the best
    foreign cluster's mean distance, zero for singletons and all-equal points.

    Returns (per_point, per_cluster, layer_mean).
    """
    x = np.asarray(points, dtype=np.float64)
    labels = np.asarray(labels)
    n = x.shape[0]
    uniq = sorted(set(labels.tolist()))
    dist = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            dist[i, j] = float(np.linalg.norm(x[i] - x[j]))
    per_point = np.zeros(n)
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        foreign = []
        for c in uniq:
            if c == labels[i]:
                continue
            mem = [j for j in range(n) if labels[j] == c]
            foreign.append(float(np.mean(dist[i, mem])))
        if not own or not foreign:
            per_point[i] = 0.0
            continue
        a = float(np.mean(dist[i, own]))
        b = min(foreign)
        top = max(a, b)
        per_point[i] = 0.0 if top == 0.0 else (b - a) / top
    per_cluster = np.array(
        [float(np.mean(per_point[labels == c])) for c in uniq]
    )
    return per_point, per_cluster, float(per_point.mean())


def distance_sum_objective(points, y):
    """Sum of Euclidean distances from y to every point."""
    x = np.asarray(points, dtype=np.float64)
    return float(np.sqrt(((x - np.asarray(y)) ** 2).sum(axis=1)).sum())


def median_grid_oracle(points, rounds=9, grid=25):
    """2-D geometric median by shrinking grid search."""
    x = np.asarray(points, dtype=np.float64)
    lo = x.min(axis=0)
    hi = x.max(axis=0)
    best_point = x.mean(axis=0)
    for _ in range(rounds):
        xs = np.linspace(lo[0], hi[0], grid)
        ys = np.linspace(lo[1], hi[1], grid)
        gx, gy = np.meshgrid(xs, ys)
        cand = np.stack([gx.ravel(), gy.ravel()], axis=1)
        obj = np.sqrt(
            ((cand[:, None, :] - x[None, :, :]) ** 2).sum(axis=2)
        ).sum(axis=1)
        best_point = cand[int(np.argmin(obj))]
        span = (hi - lo) / (grid - 1)
        lo = best_point - 2 * span
        hi = best_point + 2 * span
    return best_point, distance_sum_objective(x, best_point)


def median_gradient_norm(points, y, eps=1e-12):
    """Norm of the distance-sum subgradient at y (any dimension).

    Near zero certifies y is close to the geometric median; points closer
    to y than eps are skipped (their subgradient term is the unit ball).
    """
    x = np.asarray(points, dtype=np.float64)
    diff = np.asarray(y, dtype=np.float64) - x
    norms = np.sqrt((diff**2).sum(axis=1))
    keep = norms > eps
    grad = (diff[keep] / norms[keep, None]).sum(axis=0)
    return float(np.linalg.norm(grad))


def flops_oracle(layers):
    """Recount multiply-accumulates from layer geometry alone."""
    total = 0
    for spec in layers:
        d = spec.to_dict() if hasattr(spec, "to_dict") else dict(spec)
        if d["kind"] == "conv":
            total += (
                d["n_out"]
                * d["n_in"]
                * d["kernel_h"]
                * d["kernel_w"]
                * d["out_h"]
                * d["out_w"]
            )
        elif d["kind"] == "linear":
            total += d["n_out"] * d["n_in"]
    return total


def params_oracle(snapshot):
    """Recount parameters straight off the tensor table.

    Batchnorm running statistics are bookkeeping, not parameters, and are
    skipped by name.
    """
    total = 0
    for name, record in snapshot.tensors.items():
        if name.endswith(".running_mean") or name.endswith(".running_var"):
            continue
        total += int(np.prod(record.data.shape))
    return total
