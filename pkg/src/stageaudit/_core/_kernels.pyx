# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels, bit-identical to the numpy fallback in kernels_py.

Keep the arithmetic in lockstep with kernels_py: integer split counts feed
the same float64 expression, and distances accumulate feature by feature in
index order. Any change here must be mirrored there (tests enforce it).
"""

import numpy as np


def split_scan(vals, y, min_leaf):
    """Best binary-split boundary for one sorted feature column.

    Same contract as kernels_py.split_scan: returns (boundary, score) with
    the first boundary attaining the minimal children Gini mass, or
    (-1, inf) when no boundary is valid.
    """
    cdef double[::1] v = np.ascontiguousarray(vals, dtype=np.float64)
    cdef signed char[::1] labels = np.ascontiguousarray(y, dtype=np.int8)
    cdef Py_ssize_t ml = min_leaf
    cdef Py_ssize_t n = v.shape[0]
    if n < 2 * ml:
        return -1, float("inf")
    cdef long long total1 = 0
    cdef Py_ssize_t i
    for i in range(n):
        total1 += labels[i]
    cdef long long c1 = 0
    cdef long long c0, c1r, c0r, n_left, n_right
    cdef double best = float("inf")
    cdef Py_ssize_t best_pos = -1
    cdef double fl, fr, score
    for i in range(n - 1):
        c1 += labels[i]
        n_left = i + 1
        n_right = n - n_left
        if v[i] == v[i + 1] or n_left < ml or n_right < ml:
            continue
        c0 = n_left - c1
        c1r = total1 - c1
        c0r = n_right - c1r
        fl = <double> n_left
        fr = <double> n_right
        score = (fl - (<double> (c0 * c0 + c1 * c1)) / fl) \
            + (fr - (<double> (c0r * c0r + c1r * c1r)) / fr)
        if score < best:
            best = score
            best_pos = i
    if best_pos < 0:
        return -1, float("inf")
    return best_pos, best


def pairwise_sq_dists(a, b):
    """Squared Euclidean distances, accumulated feature by feature."""
    cdef double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] B = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t na = A.shape[0]
    cdef Py_ssize_t nb = B.shape[0]
    cdef Py_ssize_t d = A.shape[1]
    out_arr = np.zeros((na, nb), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, f
    cdef double diff, acc
    for i in range(na):
        for j in range(nb):
            acc = 0.0
            for f in range(d):
                diff = A[i, f] - B[j, f]
                acc += diff * diff
            out[i, j] = acc
    return out_arr
