"""The parameter-free candidate step ``2/(mu t + 4L)`` and its guarantees."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import ParamError, ProblemParams, validate_params
from .recurrence import z_bounds_weak


@dataclass(frozen=True)
class RatioCertificate:
    """Certified ceiling on ``z_prime_bound / weak lower bound`` for ``t >= t_threshold``."""

    q: float
    t_threshold: int
    ratio_bound: float
    omega: float


def eta_prime(p: ProblemParams, t):
    validate_params(p)
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < 0):
        raise ValueError("t must be nonnegative")
    out = 2.0 / (p.mu * t_arr + 4.0 * p.L)
    return float(out) if t_arr.ndim == 0 else out


def t_prime(p: ProblemParams) -> float:
    """Iteration from which :func:`z_prime_bound` holds (a real threshold)."""
    validate_params(p)
    if p.N <= 0:
        raise ParamError("t_prime needs N > 0")
    base = 4.0 * p.L / p.mu
    return base * max(p.L * p.mu * p.Y0 / p.N, 1.0) - base


def z_prime_bound(p: ProblemParams, t):
    """Upper bound on the expected squared distance reached with ``eta_prime``."""
    tp = t_prime(p)
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < math.ceil(tp)):
        raise ValueError(f"bound not yet valid: needs t >= T' = {tp:.6g}")
    out = (16.0 * p.N / p.mu) / (p.mu * (t_arr - tp) + 4.0 * p.L)
    return float(out) if t_arr.ndim == 0 else out


def ratio_certificate(p: ProblemParams, q: float) -> RatioCertificate:
    validate_params(p)
    if q < 2:
        raise ValueError(f"q must be >= 2, got {q}")
    if p.N <= 0 or p.Y0 <= 0:
        raise ParamError("ratio certificate needs N > 0 and Y0 > 0")
    if p.mu / (2.0 * p.L) > 0.05:
        warnings.warn("mu/(2L) > 0.05: the certificate drops terms that are only small when mu << L",
                      RuntimeWarning, stacklevel=2)
    excess = max(0.0, p.N / (p.mu * p.L * p.Y0) - 1.0)
    bound = 4.0 * (q + 2.0 * excess) / (q - 1.0)
    thr = (q - 2.0) * (4.0 * p.L / p.mu) * max(p.mu * p.L * p.Y0 / p.N, 1.0)
    return RatioCertificate(q=q, t_threshold=int(math.ceil(thr - 1e-9 * max(thr, 1.0))),
                            ratio_bound=bound, omega=p.omega)


def ratio_sweep(p: ProblemParams, q: float, span: float = 10.0, points: int = 2001) -> tuple[float, int]:
    """Largest ``z_prime_bound / weak lower`` over ``[t_threshold, span * t_threshold]``.

    Returns the maximum and the iteration at which it occurs.
    """
    cert = ratio_certificate(p, q)
    lo = max(cert.t_threshold, math.ceil(t_prime(p)))
    hi = max(lo, int(math.floor(span * cert.t_threshold)))
    t = np.unique(np.linspace(lo, hi, points).round().astype(np.int64))
    ratio = z_prime_bound(p, t) / z_bounds_weak(p, t)[0]
    i = int(np.argmax(ratio))
    return float(ratio[i]), int(t[i])
