"""Pure-Python (numpy/scipy) versions of the compiled kernels.

Same signatures and results as ``_ckernels``.  ``cross_counts`` is a sparse
incidence-matrix product instead of an explicit posting-list walk; the counts
are integers, so both routes agree exactly.  ``pool_predictions`` loops in Python
to reproduce the compiled summation order bit for bit.
"""

import math

import numpy as np
from scipy import sparse

EXPONENTIAL = 0
BOXCAR = 1

NAME = "python"


def intersect_count(a, b):
    if len(a) == 0 or len(b) == 0:
        return 0
    return int(np.intersect1d(a, b, assume_unique=True).size)


def _incidence(cols, ptr, n_cols):
    n_rows = len(ptr) - 1
    data = np.ones(len(cols), dtype=np.int64)
    return sparse.csr_matrix((data, cols, ptr), shape=(n_rows, n_cols))


def cross_counts(a_terms, a_ptr, b_terms, b_ptr, n_terms, threads=1):
    na, nb = len(a_ptr) - 1, len(b_ptr) - 1
    if na == 0 or nb == 0 or n_terms == 0:
        return np.zeros((na, nb), dtype=np.int64)
    keep = a_terms >= 0
    # drop terms absent from B, re-deriving row pointers
    row_of = np.repeat(np.arange(na), np.diff(a_ptr))[keep]
    ptr = np.zeros(na + 1, dtype=np.int64)
    np.cumsum(np.bincount(row_of, minlength=na), out=ptr[1:])
    a = _incidence(a_terms[keep], ptr, n_terms)
    b = _incidence(b_terms, b_ptr, n_terms)
    return np.asarray((a @ b.T).toarray(), dtype=np.int64)


def _kernel(x, kernel, cutoff):
    if kernel == EXPONENTIAL:
        return math.exp(-x)
    return 1.0 if x <= cutoff else 0.0


def pool_predictions(ptr, dates, dists, bandwidths, kernel, cutoff, fallback, threads=1):
    n = len(ptr) - 1
    hs = [float(h) for h in bandwidths]
    pred = np.empty(n, dtype=np.float64)
    wsum = np.zeros(n, dtype=np.float64)
    dates_l = dates.tolist()
    dists_l = dists.tolist()
    ptr_l = ptr.tolist()
    for i in range(n):
        num = 0.0
        den = 0.0
        for j in range(ptr_l[i], ptr_l[i + 1]):
            w = 1.0
            row = dists_l[j]
            for k, h in enumerate(hs):
                x = 0.0 if math.isinf(h) else row[k] / h
                w = w * _kernel(x, kernel, cutoff)
            num = num + dates_l[j] * w
            den = den + w
        wsum[i] = den
        pred[i] = num / den if den > 0.0 else fallback[i]
    return pred, wsum
