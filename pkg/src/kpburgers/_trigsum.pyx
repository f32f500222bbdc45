# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trigonometric sum used by every oscillatory-integral evaluator."""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos

cnp.import_array()


def trig_sum(a, nodes, weights, offsets):
    """out[p] = sum_k weights[k] * cos(a[p] * nodes[k] + offsets[k])."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64).ravel()
    cdef const double[::1] nv = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] ov = np.ascontiguousarray(offsets, dtype=np.float64)
    cdef Py_ssize_t n = nv.shape[0]
    if wv.shape[0] != n or ov.shape[0] != n:
        raise ValueError("nodes, weights and offsets must have equal length")
    cdef Py_ssize_t m = av.shape[0]
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t p, k
    cdef double acc, ap
    with nogil:
        for p in range(m):
            ap = av[p]
            acc = 0.0
            for k in range(n):
                acc = acc + wv[k] * cos(ap * nv[k] + ov[k])
            res[p] = acc
    return out.reshape(np.shape(a))
