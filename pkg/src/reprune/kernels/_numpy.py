"""Reference numpy implementations of the clustering hot paths.

This is the fallback backend; the accelerated twin in _numba.py must agree
with it on every decision (merge order, cluster counts), though not bit for
bit. Distances are built from explicit row differences rather than the
gram-matrix identity so that translating every row by a common vector leaves
each entry untouched, and every entry comes from one fixed-order summation
independent of chunking.
"""

import numpy as np

# cap on the (block x n x dim) difference temporaries, in float64 elements
_CHUNK_FLOATS = 4_000_000


def pairwise_sq_dists(x):
    """Full symmetric matrix of squared Euclidean distances between rows."""
    n, dim = x.shape
    out = np.empty((n, n))
    step = max(1, _CHUNK_FLOATS // max(n * dim, 1))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        diff = x[lo:hi, None, :] - x[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:hi])
    np.fill_diagonal(out, 0.0)
    return out


def ward_linkage(dsq):
    """Greedy Ward merges via the Lance-Williams recurrence.

    `dsq` is the squared-distance matrix; the maintained entries equal twice
    the Ward merge cost throughout. Node ids follow the usual linkage
    convention: leaves are 0..n-1 and the t-th merge creates node n+t. Exact
    cost ties go to the lexicographically smallest (left, right) id pair.

    Returns (merges, costs, new_sizes): an (n-1, 2) id array with left < right,
    the Ward cost of each merge, and the size of each merged cluster.
    """
    n = dsq.shape[0]
    merges = np.empty((n - 1, 2), dtype=np.int64)
    costs = np.empty(n - 1)
    new_sizes = np.empty(n - 1, dtype=np.int64)
    if n == 1:
        return merges, costs, new_sizes

    d = dsq.astype(np.float64, copy=True)
    np.fill_diagonal(d, np.inf)
    size = np.ones(n)
    node = np.arange(n, dtype=np.int64)

    for t in range(n - 1):
        m = d.min()
        ci, cj = np.nonzero(d == m)
        upper = ci < cj
        ci, cj = ci[upper], cj[upper]
        left = np.minimum(node[ci], node[cj])
        right = np.maximum(node[ci], node[cj])
        pick = np.argmin(left * np.int64(2 * n) + right)
        i, j = int(ci[pick]), int(cj[pick])

        si, sj, dij = size[i], size[j], d[i, j]
        merges[t, 0] = left[pick]
        merges[t, 1] = right[pick]
        costs[t] = 0.5 * dij
        new_sizes[t] = round(si + sj)

        row = ((si + size) * d[i, :] + (sj + size) * d[j, :] - size * dij) / (
            si + sj + size
        )
        d[i, :] = row
        d[:, i] = row
        d[i, i] = np.inf
        d[j, :] = np.inf
        d[:, j] = np.inf
        size[i] = si + sj
        size[j] = 0.0
        node[i] = n + t
    return merges, costs, new_sizes


def silhouette_sweep(deuc, labels, sizes, merge_dst, merge_src):
    """Layer-mean silhouette at each state of a nested merge schedule.

    `deuc` is the full Euclidean distance matrix, `labels`/`sizes` the
    starting assignment over cluster slots. Step t folds slot merge_src[t]
    into merge_dst[t]. Returns one mean per state, starting assignment first
    (length len(merge_dst) + 1). States with fewer than two live clusters
    score 0 by convention, as do singleton members and all-coincident points.
    """
    n = deuc.shape[0]
    slots = sizes.shape[0]
    lab = labels.astype(np.int64, copy=True)
    sz = sizes.astype(np.float64)
    sums = np.zeros((n, slots))
    for c in range(slots):
        members = np.flatnonzero(lab == c)
        if members.size:
            sums[:, c] = deuc[:, members].sum(axis=1)

    steps = merge_dst.shape[0]
    means = np.empty(steps + 1)
    idx = np.arange(n)
    for t in range(steps + 1):
        means[t] = _mean_silhouette(sums, lab, sz, idx)
        if t == steps:
            break
        dst, src = merge_dst[t], merge_src[t]
        sums[:, dst] += sums[:, src]
        sz[dst] += sz[src]
        sz[src] = 0.0
        lab[lab == src] = dst
    return means


def _mean_silhouette(sums, lab, sz, idx):
    alive = np.flatnonzero(sz > 0.0)
    if alive.size < 2:
        return 0.0
    own = sums[idx, lab]
    size_own = sz[lab]
    a = own / np.maximum(size_own - 1.0, 1.0)
    ratios = sums[:, alive] / sz[alive]
    pos = np.empty(sz.shape[0], dtype=np.int64)
    pos[alive] = np.arange(alive.size)
    ratios[idx, pos[lab]] = np.inf
    b = ratios.min(axis=1)
    denom = np.maximum(a, b)
    s = np.where(denom > 0.0, (b - a) / np.where(denom > 0.0, denom, 1.0), 0.0)
    s = np.where(size_own == 1.0, 0.0, s)
    return float(s.mean())
