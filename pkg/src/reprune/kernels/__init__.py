"""Backend dispatch for the clustering hot paths.

Two interchangeable implementations live here: a numba-jitted one and a pure
numpy one. The active backend is chosen at import time from the
REPRUNE_BACKEND environment variable:

    REPRUNE_BACKEND=numba   require the jitted backend (ImportError if absent)
    REPRUNE_BACKEND=numpy   force the pure-numpy backend
    unset or "auto"         numba when importable, numpy otherwise

`use_backend` rebinds at runtime (used by tests and benchmarks). All inputs
are normalized to contiguous float64/int64 so both backends see identical
dtypes.
"""

import os

import numpy as np

from . import _numpy


def _load(name):
    if name == "numpy":
        return _numpy, "numpy"
    if name == "numba":
        from . import _numba

        return _numba, "numba"
    if name == "auto":
        try:
            from . import _numba

            return _numba, "numba"
        except ImportError:
            return _numpy, "numpy"
    raise ValueError(
        f"unknown backend {name!r}: expected 'numba', 'numpy', or 'auto'"
    )


_impl, BACKEND = _load(os.environ.get("REPRUNE_BACKEND", "auto").strip().lower() or "auto")


def use_backend(name):
    """Switch the active backend; returns the name actually in effect."""
    global _impl, BACKEND
    _impl, BACKEND = _load(name)
    return BACKEND


def available_backends():
    names = ["numpy"]
    try:
        from . import _numba  # noqa: F401

        names.insert(0, "numba")
    except ImportError:
        pass
    return names


def _rows(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def pairwise_sq_dists(x):
    return _impl.pairwise_sq_dists(_rows(x))


def ward_linkage(dsq):
    return _impl.ward_linkage(_rows(dsq))


def silhouette_sweep(deuc, labels, sizes, merge_dst, merge_src):
    return _impl.silhouette_sweep(
        _rows(deuc),
        np.ascontiguousarray(labels, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(merge_dst, dtype=np.int64),
        np.ascontiguousarray(merge_src, dtype=np.int64),
    )
