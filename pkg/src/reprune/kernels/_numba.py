"""Numba-accelerated twin of _numpy.py.

Same decision semantics as the reference backend: identical merge ordering,
tie rules, and conventions; floating-point results may differ in final ulps
because summation orders differ. Kernels are single-threaded on purpose --
output must not depend on thread count.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def pairwise_sq_dists(x):
    n, dim = x.shape
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        for j in range(i + 1, n):
            acc = 0.0
            for k in range(dim):
                diff = x[i, k] - x[j, k]
                acc += diff * diff
            out[i, j] = acc
            out[j, i] = acc
    return out


@njit(cache=True)
def ward_linkage(dsq):
    n = dsq.shape[0]
    merges = np.empty((n - 1, 2), dtype=np.int64)
    costs = np.empty(n - 1, dtype=np.float64)
    new_sizes = np.empty(n - 1, dtype=np.int64)
    if n == 1:
        return merges, costs, new_sizes

    d = dsq.copy()
    for i in range(n):
        d[i, i] = np.inf
    size = np.ones(n, dtype=np.float64)
    node = np.arange(n).astype(np.int64)
    alive = np.ones(n, dtype=np.bool_)

    for t in range(n - 1):
        best = np.inf
        bl = np.int64(-1)
        br = np.int64(-1)
        bi = -1
        bj = -1
        for i in range(n):
            if not alive[i]:
                continue
            for j in range(i + 1, n):
                if not alive[j]:
                    continue
                v = d[i, j]
                if node[i] < node[j]:
                    l, r = node[i], node[j]
                else:
                    l, r = node[j], node[i]
                if v < best or (
                    v == best and (l < bl or (l == bl and r < br))
                ):
                    best = v
                    bl = l
                    br = r
                    bi = i
                    bj = j

        si = size[bi]
        sj = size[bj]
        dij = d[bi, bj]
        merges[t, 0] = bl
        merges[t, 1] = br
        costs[t] = 0.5 * dij
        new_sizes[t] = np.int64(round(si + sj))

        for k in range(n):
            if not alive[k] or k == bi or k == bj:
                continue
            sk = size[k]
            val = ((si + sk) * d[bi, k] + (sj + sk) * d[bj, k] - sk * dij) / (
                si + sj + sk
            )
            d[bi, k] = val
            d[k, bi] = val
        alive[bj] = False
        size[bi] = si + sj
        size[bj] = 0.0
        node[bi] = n + t
    return merges, costs, new_sizes


@njit(cache=True)
def silhouette_sweep(deuc, labels, sizes, merge_dst, merge_src):
    n = deuc.shape[0]
    slots = sizes.shape[0]
    lab = labels.copy()
    sz = sizes.astype(np.float64)
    sums = np.zeros((n, slots), dtype=np.float64)
    for j in range(n):
        for i in range(n):
            sums[j, lab[i]] += deuc[j, i]

    steps = merge_dst.shape[0]
    means = np.empty(steps + 1, dtype=np.float64)
    for t in range(steps + 1):
        live = 0
        for c in range(slots):
            if sz[c] > 0.0:
                live += 1
        if live < 2:
            means[t] = 0.0
        else:
            total = 0.0
            for j in range(n):
                c0 = lab[j]
                size_own = sz[c0]
                if size_own <= 1.0:
                    continue  # singleton member scores 0
                a = sums[j, c0] / (size_own - 1.0)
                b = np.inf
                for c in range(slots):
                    if c == c0 or sz[c] <= 0.0:
                        continue
                    r = sums[j, c] / sz[c]
                    if r < b:
                        b = r
                denom = a if a > b else b
                if denom > 0.0:
                    total += (b - a) / denom
            means[t] = total / n
        if t < steps:
            dst = merge_dst[t]
            src = merge_src[t]
            for j in range(n):
                sums[j, dst] += sums[j, src]
                if lab[j] == src:
                    lab[j] = dst
            sz[dst] += sz[src]
            sz[src] = 0.0
    return means
