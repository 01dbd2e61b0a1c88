# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops for the compact bump kernel: grid KDE and pairwise sums."""
from libc.math cimport exp, ceil, floor

import numpy as np

cdef double BUMP_NORM = 0.44399381616807943782


cdef inline double bump(double u) nogil:
    cdef double v
    if u <= -1.0 or u >= 1.0:
        return 0.0
    v = 1.0 - u * u
    return exp(-1.0 / v) / BUMP_NORM


def kde_grid_1d(double[:] x, double h, double lo, double dx, Py_ssize_t ngrid):
    """Sum of ``K((g_k - x_i)/h)/(n h)`` at ``g_k = lo + k dx``."""
    out_arr = np.zeros(ngrid)
    cdef double[:] out = out_arr
    cdef Py_ssize_t n = x.shape[0], i, k, k0, k1
    cdef double xi, scale = 1.0 / (n * h)
    with nogil:
        for i in range(n):
            xi = x[i]
            k0 = <Py_ssize_t> ceil((xi - h - lo) / dx)
            k1 = <Py_ssize_t> floor((xi + h - lo) / dx)
            if k0 < 0:
                k0 = 0
            if k1 > ngrid - 1:
                k1 = ngrid - 1
            for k in range(k0, k1 + 1):
                out[k] += bump((lo + k * dx - xi) / h)
        for k in range(ngrid):
            out[k] *= scale
    return out_arr


def kde_grid_2d(double[:, :] x, double h0, double h1, double lo0, double lo1,
                double dx0, double dx1, Py_ssize_t n0, Py_ssize_t n1):
    out_arr = np.zeros((n0, n1))
    cdef double[:, :] out = out_arr
    cdef Py_ssize_t n = x.shape[0], i, a, b, a0, a1, b0, b1
    cdef double x0, x1, w0
    cdef double scale = 1.0 / (n * h0 * h1)
    cdef double[:] wb = np.zeros(n1)
    with nogil:
        for i in range(n):
            x0 = x[i, 0]
            x1 = x[i, 1]
            a0 = <Py_ssize_t> ceil((x0 - h0 - lo0) / dx0)
            a1 = <Py_ssize_t> floor((x0 + h0 - lo0) / dx0)
            b0 = <Py_ssize_t> ceil((x1 - h1 - lo1) / dx1)
            b1 = <Py_ssize_t> floor((x1 + h1 - lo1) / dx1)
            if a0 < 0:
                a0 = 0
            if a1 > n0 - 1:
                a1 = n0 - 1
            if b0 < 0:
                b0 = 0
            if b1 > n1 - 1:
                b1 = n1 - 1
            for b in range(b0, b1 + 1):
                wb[b] = bump((lo1 + b * dx1 - x1) / h1)
            for a in range(a0, a1 + 1):
                w0 = bump((lo0 + a * dx0 - x0) / h0)
                if w0 == 0.0:
                    continue
                for b in range(b0, b1 + 1):
                    out[a, b] += w0 * wb[b]
        for a in range(n0):
            for b in range(n1):
                out[a, b] *= scale
    return out_arr


def pair_kernel_sum(double[:, :] x, double[:] h):
    """``sum_{i<j} prod_l K((x_il - x_jl)/h_l)`` for rows sorted by column 0."""
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], i, j, l
    cdef double total = 0.0, prod, diff
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                diff = x[j, 0] - x[i, 0]
                if diff >= h[0]:
                    break
                prod = bump(diff / h[0])
                for l in range(1, d):
                    if prod == 0.0:
                        break
                    prod *= bump((x[j, l] - x[i, l]) / h[l])
                total += prod
    return total
