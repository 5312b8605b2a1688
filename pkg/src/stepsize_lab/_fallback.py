"""Pure-Python twins of the compiled kernels in ``_kernels.pyx``."""

from __future__ import annotations

import math

import numpy as np


def optimal_plan(mu: float, L: float, N: float, Y0: float, t_max: int):
    z = np.empty(t_max + 1)
    eta = np.empty(t_max + 1)
    cap = 1.0 / (2.0 * L)
    zt = float(Y0)
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
    return z, eta


def affine_recurrence(etas, a: float, b: float, c: float, y0: float):
    etas = np.asarray(etas, dtype=np.float64)
    out = np.empty(etas.shape[0] + 1)
    y = float(y0)
    out[0] = y
    for t, e in enumerate(etas.tolist()):
        y = (1.0 - a * e + b * e * e) * y + c * e * e
        out[t + 1] = y
    return out


def rational_decay(g: float, a: float, N: float, y0: float, t_max: int):
    out = np.empty(t_max + 1)
    y = float(y0)
    for t in range(t_max + 1):
        out[t] = y
        y = y - g * y * y / (N + a * y)
    return out


def quadratic_block(w, etas, scales, xi):
    for k in range(etas.shape[0]):
        a = etas[k] * scales[k]
        w *= 1.0 - a
        w += a * xi[k]


def logreg_block(w, indptr, indices, data, labels, lam, rows, etas):
    for k in range(etas.shape[0]):
        i = int(rows[k])
        lo, hi = indptr[i], indptr[i + 1]
        idx = indices[lo:hi]
        vals = data[lo:hi]
        y = labels[i]
        margin = y * float(np.dot(vals, w[idx]))
        if margin >= 0.0:
            sig = math.exp(-margin)
            sig = sig / (1.0 + sig)
        else:
            sig = 1.0 / (1.0 + math.exp(margin))
        e = etas[k]
        w *= 1.0 - e * lam
        w[idx] += (e * y * sig) * vals
