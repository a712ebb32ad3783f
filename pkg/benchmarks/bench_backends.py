"""Time the compute kernels under each available backend.

Runs pairwise distances, the full linkage build, and the silhouette sweep
over a range of layer sizes and reports the median wall time per backend,
plus the speedup of the accelerated backend where both are available.

Usage:
    python benchmarks/bench_backends.py [--sizes 64,128,256] [--dim 288]
                                        [--repeats 5] [--seed 0]
"""

import argparse
import statistics
import time

import numpy as np

from reprune import kernels
from reprune.container import FilterMatrix
from reprune.election import ElectionConfig, elect_layer


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok]


def time_case(fn, repeats):
    """Median wall time over `repeats` calls, after one warm-up call."""
    fn()  # warm-up; first numba call pays JIT compilation
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    return statistics.median(samples)


def bench_backend(name, sizes, dim, repeats, seed):
    kernels.use_backend(name)
    rng = np.random.default_rng(seed)
    rows = {}
    for n in sizes:
        x = rng.normal(size=(n, dim))
        dsq = kernels.pairwise_sq_dists(x)
        config = ElectionConfig(lam=0.1)
        cases = {
            "pairwise": lambda x=x: kernels.pairwise_sq_dists(x),
            "linkage": lambda dsq=dsq: kernels.ward_linkage(dsq),
            "election": lambda x=x, c=config: elect_layer(FilterMatrix(rows=x), c),
        }
        rows[n] = {case: time_case(fn, repeats) for case, fn in cases.items()}
    return rows


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=_int_list, default=[64, 128, 256])
    parser.add_argument("--dim", type=int, default=288)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}")
    print(f"sizes: {args.sizes}, dim: {args.dim}, repeats: {args.repeats}")

    results = {
        name: bench_backend(name, args.sizes, args.dim, args.repeats, args.seed)
        for name in backends
    }

    header = f"{'case':<10} {'n':>5} " + " ".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f" {'speedup':>9}"
    print()
    print(header)
    print("-" * len(header))
    for case in ("pairwise", "linkage", "election"):
        for n in args.sizes:
            times = [results[b][n][case] for b in backends]
            line = f"{case:<10} {n:>5} " + " ".join(f"{t * 1e3:>10.2f}ms" for t in times)
            if len(backends) > 1 and times[0] > 0:
                line += f" {times[-1] / times[0]:>8.1f}x"
            print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
