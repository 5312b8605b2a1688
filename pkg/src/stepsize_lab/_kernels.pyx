# cython: language_level=3
"""Compiled inner loops. Signatures mirror ``_fallback`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()


def optimal_plan(double mu, double L, double N, double Y0, Py_ssize_t t_max):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] z_arr = np.empty(t_max + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] eta_arr = np.empty(t_max + 1)
    cdef double[::1] z = z_arr
    cdef double[::1] eta = eta_arr
    cdef double cap = 1.0 / (2.0 * L)
    cdef double zt = Y0, e
    cdef Py_ssize_t t
    with nogil:
        for t in range(t_max + 1):
            z[t] = zt
            if N > 0.0:
                e = mu * zt / (2.0 * N)
                if e > cap:
                    e = cap
            else:
                e = cap
            eta[t] = e
            zt = (1.0 - mu * e) * zt + e * e * N
    return z_arr, eta_arr


def affine_recurrence(const double[::1] etas, double a, double b, double c, double y0):
    cdef Py_ssize_t n = etas.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(n + 1)
    cdef double[::1] out = out_arr
    cdef double y = y0, e
    cdef Py_ssize_t t
    with nogil:
        out[0] = y
        for t in range(n):
            e = etas[t]
            y = (1.0 - a * e + b * e * e) * y + c * e * e
            out[t + 1] = y
    return out_arr


def rational_decay(double g, double a, double N, double y0, Py_ssize_t t_max):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(t_max + 1)
    cdef double[::1] out = out_arr
    cdef double y = y0
    cdef Py_ssize_t t
    with nogil:
        for t in range(t_max + 1):
            out[t] = y
            y = y - g * y * y / (N + a * y)
    return out_arr


def quadratic_block(double[::1] w, const double[::1] etas, const double[::1] scales,
                    const double[:, ::1] xi):
    cdef Py_ssize_t steps = etas.shape[0]
    cdef Py_ssize_t d = w.shape[0]
    cdef Py_ssize_t k, j
    cdef double a, keep
    with nogil:
        for k in range(steps):
            a = etas[k] * scales[k]
            keep = 1.0 - a
            for j in range(d):
                w[j] = keep * w[j] + a * xi[k, j]


def logreg_block(double[::1] w, const long long[::1] indptr, const int[::1] indices,
                 const double[::1] data, const double[::1] labels, double lam,
                 const long long[::1] rows, const double[::1] etas):
    cdef Py_ssize_t steps = etas.shape[0]
    cdef Py_ssize_t d = w.shape[0]
    cdef Py_ssize_t k, j, p, i
    cdef double margin, sig, e, shrink, coef, y
    with nogil:
        for k in range(steps):
            i = rows[k]
            y = labels[i]
            margin = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                margin = margin + data[p] * w[indices[p]]
            margin = y * margin
            # sigma(-margin), split by sign to avoid overflow
            if margin >= 0.0:
                sig = exp(-margin)
                sig = sig / (1.0 + sig)
            else:
                sig = 1.0 / (1.0 + exp(margin))
            e = etas[k]
            shrink = 1.0 - e * lam
            for j in range(d):
                w[j] = shrink * w[j]
            coef = e * y * sig
            for p in range(indptr[i], indptr[i + 1]):
                w[indices[p]] = w[indices[p]] + coef * data[p]
