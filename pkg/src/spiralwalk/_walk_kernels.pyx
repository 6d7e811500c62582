# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled walk kernels.

Call-compatible with _kernels_py.py; see that module for the semantics.
The per-step loops here are the only parts of a simulation that cannot be
expressed as whole-array NumPy operations (each step depends on the state
left by the previous one), so they dominate runtime in the pure-Python
backend and are worth compiling.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "cython"


def dense_stream_q(double[:, ::1] x_block, double[::1] s):
    cdef Py_ssize_t m = x_block.shape[0]
    cdef Py_ssize_t d = x_block.shape[1]
    out = np.empty(m)
    cdef double[::1] y = out
    cdef Py_ssize_t k, j
    cdef double acc, xv
    for k in range(m):
        acc = 0.0
        for j in range(d):
            acc += x_block[k, j] * s[j]
        y[k] = acc
        for j in range(d):
            s[j] += x_block[k, j]
    return out


def radial_chain(double[::1] r, double[::1] c, double nsq0):
    cdef Py_ssize_t n = r.shape[0]
    out = np.empty(n)
    cdef double[::1] o = out
    cdef double cur = nsq0
    cdef double rk
    cdef Py_ssize_t k
    for k in range(n):
        rk = r[k]
        cur = cur + rk * rk + 2.0 * rk * sqrt(cur) * c[k]
        if cur < 0.0:
            cur = 0.0
        o[k] = cur
    return out


def radial_chain_batch(double[:, ::1] r, double[:, ::1] c):
    cdef Py_ssize_t reps = r.shape[0]
    cdef Py_ssize_t n = r.shape[1]
    out = np.empty((reps, n))
    cdef double[:, ::1] o = out
    cdef double cur, rk
    cdef Py_ssize_t i, k
    for i in range(reps):
        cur = 0.0
        for k in range(n):
            rk = r[i, k]
            cur = cur + rk * rk + 2.0 * rk * sqrt(cur) * c[i, k]
            if cur < 0.0:
                cur = 0.0
            o[i, k] = cur
    return out


def axis_stream_q(cnp.int64_t[::1] axes, double[::1] values, double[::1] box):
    cdef Py_ssize_t m = axes.shape[0]
    out = np.empty(m)
    cdef double[::1] y = out
    cdef Py_ssize_t k
    cdef cnp.int64_t j
    for k in range(m):
        j = axes[k]
        y[k] = values[k] * box[j]
        box[j] += values[k]
    return out
