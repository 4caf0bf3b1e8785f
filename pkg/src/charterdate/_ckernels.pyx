# cython: language_level=3
"""Compiled hot loops: shingle intersection counts and pooled kernel means.

Must stay numerically identical to ``_pykernels``; see tests/test_kernels.py.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, isinf
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef enum:
    EXPONENTIAL = 0
    BOXCAR = 1

NAME = "cython"


cdef inline Py_ssize_t _merge_count(const uint64_t* a, Py_ssize_t na,
                                    const uint64_t* b, Py_ssize_t nb) noexcept nogil:
    cdef Py_ssize_t i = 0, j = 0, c = 0
    cdef uint64_t x, y
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if x < y:
            i += 1
        elif y < x:
            j += 1
        else:
            c += 1
            i += 1
            j += 1
    return c


def intersect_count(const uint64_t[::1] a, const uint64_t[::1] b):
    """Size of the intersection of two sorted, duplicate-free fingerprint arrays."""
    if a.shape[0] == 0 or b.shape[0] == 0:
        return 0
    return _merge_count(&a[0], a.shape[0], &b[0], b.shape[0])


def cross_counts(const int64_t[::1] a_terms, const int64_t[::1] a_ptr,
                 const int64_t[::1] b_terms, const int64_t[::1] b_ptr,
                 Py_ssize_t n_terms, int threads=1):
    """All-pairs intersection counts via an inverted index over B.

    Rows hold term ids in ``[0, n_terms)`` (ids absent from B may be ``-1``);
    row ``i`` of A is ``a_terms[a_ptr[i]:a_ptr[i+1]]``.  Returns an int64
    array of shape ``(rows of A, rows of B)``.
    """
    cdef Py_ssize_t na = a_ptr.shape[0] - 1
    cdef Py_ssize_t nb = b_ptr.shape[0] - 1
    out_arr = np.zeros((na, nb), dtype=np.int64)
    if na == 0 or nb == 0 or n_terms == 0:
        return out_arr
    cdef int64_t[:, ::1] out = out_arr
    # postings: for each term, the B rows containing it (counting sort, ascending rows)
    post_ptr_arr = np.zeros(n_terms + 1, dtype=np.int64)
    cdef int64_t[::1] post_ptr = post_ptr_arr
    cdef Py_ssize_t nnz = b_terms.shape[0]
    post_arr = np.empty(nnz, dtype=np.int64)
    cdef int64_t[::1] post = post_arr
    fill_arr = np.empty(n_terms, dtype=np.int64)
    cdef int64_t[::1] fill = fill_arr
    cdef Py_ssize_t i, j, p, q, t
    with nogil:
        for p in range(nnz):
            post_ptr[b_terms[p] + 1] += 1
        for t in range(n_terms):
            post_ptr[t + 1] += post_ptr[t]
            fill[t] = post_ptr[t]
        for j in range(nb):
            for p in range(b_ptr[j], b_ptr[j + 1]):
                t = b_terms[p]
                post[fill[t]] = j
                fill[t] += 1
    if threads < 1:
        threads = 1
    for i in prange(na, nogil=True, schedule="dynamic", num_threads=threads):
        for p in range(a_ptr[i], a_ptr[i + 1]):
            t = a_terms[p]
            if t < 0:
                continue
            for q in range(post_ptr[t], post_ptr[t + 1]):
                out[i, post[q]] += 1
    return out_arr


cdef inline double _kernel(double x, int kernel, double cutoff) noexcept nogil:
    if kernel == EXPONENTIAL:
        return exp(-x)
    if x <= cutoff:
        return 1.0
    return 0.0


def pool_predictions(const int64_t[::1] ptr, const double[::1] dates,
                     const double[:, ::1] dists, const double[::1] bandwidths,
                     int kernel, double cutoff, const double[::1] fallback,
                     int threads=1):
    """Kernel-weighted mean date for each pool in a packed (CSR) layout.

    Pool ``i`` owns rows ``ptr[i]:ptr[i+1]`` of ``dates``/``dists``.  Weights are
    ``prod_k K(dists[j, k] / bandwidths[k])`` (an infinite bandwidth contributes
    ``K(0)``), accumulated sequentially in row order.  A pool without positive
    total weight is given ``fallback[i]``.

    Returns ``(predictions, weight_sums)``.
    """
    cdef Py_ssize_t n = ptr.shape[0] - 1
    cdef Py_ssize_t r = bandwidths.shape[0]
    pred_arr = np.empty(n, dtype=np.float64)
    wsum_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] pred = pred_arr
    cdef double[::1] wsum = wsum_arr
    cdef Py_ssize_t i, j, k
    cdef double num, den, w, x
    if threads < 1:
        threads = 1
    for i in prange(n, nogil=True, schedule="static", num_threads=threads):
        num = 0.0
        den = 0.0
        for j in range(ptr[i], ptr[i + 1]):
            w = 1.0
            for k in range(r):
                if isinf(bandwidths[k]):
                    x = 0.0
                else:
                    x = dists[j, k] / bandwidths[k]
                w = w * _kernel(x, kernel, cutoff)
            num = num + dates[j] * w
            den = den + w
        wsum[i] = den
        if den > 0.0:
            pred[i] = num / den
        else:
            pred[i] = fallback[i]
    return pred_arr, wsum_arr
