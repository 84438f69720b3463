# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled Kahan-compensated matrix-vector product.

Each output row is summed sequentially over the columns in index order, so
the result does not depend on how rows are spread over threads.
"""
import numpy as np
from cython.parallel cimport prange


def kahan_matvec(const double[:, ::1] M, const double[::1] x, int threads=1):
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t m = M.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc, comp, term, tmp
    if x.shape[0] != m:
        raise ValueError(f"shape mismatch: matrix has {m} columns, vector {x.shape[0]}")
    if threads < 1:
        threads = 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] y = out
    for i in prange(n, nogil=True, num_threads=threads, schedule="static"):
        acc = 0.0
        comp = 0.0
        for j in range(m):
            term = M[i, j] * x[j] - comp
            tmp = acc + term
            comp = (tmp - acc) - term
            acc = tmp
        y[i] = acc
    return out
