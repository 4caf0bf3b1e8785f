"""Backend selection for the hot loops.

The compiled extension is used when it imports; otherwise, or when
``CHARTERDATE_KERNELS=python`` is set, the numpy/scipy fallback is used.
``set_backend`` switches at runtime (tests and the benchmark use it).
"""

import importlib
import logging
import os

import numpy as np

from . import _pykernels

log = logging.getLogger(__name__)

EXPONENTIAL = 0
BOXCAR = 1
KERNEL_CODES = {"exponential": EXPONENTIAL, "boxcar": BOXCAR}


def _load_compiled():
    try:
        return importlib.import_module("charterdate._ckernels")
    except ImportError:
        return None


_compiled = _load_compiled()
_impl = _pykernels if os.environ.get("CHARTERDATE_KERNELS") == "python" or _compiled is None else _compiled


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])


def backend():
    return _impl.NAME


def set_backend(name):
    """Select ``"cython"`` or ``"python"``; returns the previous backend name."""
    global _impl
    previous = _impl.NAME
    if name == "python":
        _impl = _pykernels
    elif name == "cython":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not available; reinstall with a C compiler")
        _impl = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")
    return previous


def default_threads():
    return os.cpu_count() or 1


def intersect_count(a, b):
    return _impl.intersect_count(a, b)


class TermSpace:
    """Dense term ids for the fingerprints of B, reusable across many A blocks."""

    def __init__(self, b_data):
        b_data = np.ascontiguousarray(b_data, dtype=np.uint64)
        self.universe, inverse = np.unique(b_data, return_inverse=True)
        self.b_terms = np.ascontiguousarray(inverse.ravel(), dtype=np.int64)

    def __len__(self):
        return int(self.universe.size)

    def lookup(self, a_data):
        """Term ids for ``a_data``; fingerprints absent from B map to -1."""
        a_data = np.ascontiguousarray(a_data, dtype=np.uint64)
        if not self.universe.size:
            return np.full(a_data.size, -1, dtype=np.int64)
        pos = np.searchsorted(self.universe, a_data)
        pos[pos == self.universe.size] = 0
        return np.where(self.universe[pos] == a_data, pos, -1).astype(np.int64)


def cross_intersections(a_data, a_ptr, b_data, b_ptr, threads=None, space=None):
    """Intersection sizes for every (row of A, row of B) pair of fingerprint rows.

    ``space`` is an optional precomputed ``TermSpace(b_data)``.
    """
    if space is None:
        space = TermSpace(b_data)
    return _impl.cross_counts(
        space.lookup(a_data),
        np.ascontiguousarray(a_ptr, dtype=np.int64),
        space.b_terms,
        np.ascontiguousarray(b_ptr, dtype=np.int64),
        len(space),
        threads or 1,
    )


def pool_predictions(ptr, dates, dists, bandwidths, kernel, cutoff, fallback, threads=None):
    code = KERNEL_CODES[kernel] if isinstance(kernel, str) else int(kernel)
    dists = np.ascontiguousarray(dists, dtype=np.float64)
    if dists.ndim != 2:
        raise ValueError("dists must be a 2-D array (rows x orders)")
    return _impl.pool_predictions(
        np.ascontiguousarray(ptr, dtype=np.int64),
        np.ascontiguousarray(dates, dtype=np.float64),
        dists,
        np.ascontiguousarray(bandwidths, dtype=np.float64),
        code,
        float(cutoff),
        np.ascontiguousarray(fallback, dtype=np.float64),
        threads or 1,
    )
