"""Numpy fallback for the compiled kernels.

Rows are vectorised; columns are visited in index order with the same
compensated update as the compiled loop, so both backends agree bit for bit.
"""
import numpy as np


def kahan_matvec(M, x, threads=1):
    M = np.ascontiguousarray(M, dtype=np.float64)
    x = np.ascontiguousarray(x, dtype=np.float64)
    n, m = M.shape
    if x.shape != (m,):
        raise ValueError(f"shape mismatch: matrix has {m} columns, vector {x.shape[0]}")
    cols = np.ascontiguousarray(M.T)
    acc = np.zeros(n)
    comp = np.zeros(n)
    for j in range(m):
        term = cols[j] * x[j] - comp
        tmp = acc + term
        comp = (tmp - acc) - term
        acc = tmp
    return acc
