"""The minimized upper-bound sequence ``Z_t`` and its bounds.

``Z_{t+1} = (1 - mu*eta_t) Z_t + eta_t**2 N`` with ``Z_0 = Y0`` bounds the
expected squared distance of SGD as long as every ``eta_t <= 1/(2L)``.
Choosing each ``eta_t`` greedily minimizes every ``Z_t`` simultaneously.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import ParamError, ProblemParams, Trace, validate_params


@dataclass(frozen=True)
class OptimalPlan:
    """Greedy-optimal steps and the resulting ``Z_t`` for ``t = 0..t_max``.

    ``W`` is ``None`` in the noiseless case, where the cap is used forever.
    """

    params: ProblemParams
    W: int | None
    z: Trace
    eta: Trace


def unroll_recurrence(beta: Sequence[float], gamma: Sequence[float], y1: float) -> float:
    """Closed form of ``y_{k+1} = beta_k y_k + gamma_k`` after ``len(beta)`` steps.

    Returns ``sum_i (prod_{j>i} beta_j) gamma_i + (prod_j beta_j) y1``.
    """
    b = np.asarray(beta, dtype=np.float64)
    g = np.asarray(gamma, dtype=np.float64)
    if b.shape != g.shape or b.ndim != 1:
        raise ValueError(f"beta and gamma lengths differ ({b.size} vs {g.size})")
    if b.size == 0:
        return float(y1)
    # tail[i] = prod_{j=i+1}^{t} beta_j, with the empty product 1 at the end
    tail = np.ones_like(b)
    tail[:-1] = np.cumprod(b[::-1])[::-1][1:]
    return float(np.dot(tail, g) + np.prod(b) * y1)


def compute_W(p: ProblemParams) -> int:
    """Length of the initial window in which the optimal step is the cap ``1/(2L)``."""
    validate_params(p)
    if p.N == 0.0:
        if p.Y0 == 0.0:
            return 0
        raise ParamError("infinite window: N = 0 keeps the step at 1/(2L) forever")
    if p.Y0 == 0.0 or p.N / p.Y0 >= p.mu * p.L:
        return 0
    ratio = math.log(2.0 * p.mu * p.L * p.Y0 / p.N - 1.0)
    contraction = -math.log1p(-p.mu / (2.0 * p.L))
    return int(math.ceil(ratio / contraction))


def optimal_eta(p: ProblemParams, z_t: float) -> float:
    """Minimizer of ``(1 - mu eta) z_t + eta^2 N`` subject to ``eta <= 1/(2L)``."""
    validate_params(p)
    if z_t < 0:
        raise ValueError(f"z_t must be nonnegative, got {z_t}")
    cap = 1.0 / (2.0 * p.L)
    if p.N == 0.0:
        return cap
    return min(cap, p.mu * z_t / (2.0 * p.N))


def z_closed_form_prewindow(p: ProblemParams, t: int) -> float:
    """``Z_t`` inside the capped window, in closed form."""
    validate_params(p)
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = 1.0 - p.mu / (2.0 * p.L)
    if p.N == 0.0:
        return a**t * p.Y0
    W = compute_W(p)
    if t > W:
        raise ValueError(f"closed form only holds for t <= W = {W}, got t={t}")
    floor = p.N / (2.0 * p.mu * p.L)
    return floor + a**t * (p.Y0 - floor)


def iterate_plan(p: ProblemParams, t_max: int) -> OptimalPlan:
    validate_params(p)
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    if t_max >= np.iinfo(np.int64).max:
        raise OverflowError("t_max exceeds the 64-bit iteration range")
    z, eta = kernels.optimal_plan(p.mu, p.L, p.N, p.Y0, int(t_max))
    W = None if (p.N == 0.0 and p.Y0 > 0.0) else compute_W(p)
    t = np.arange(t_max + 1)
    return OptimalPlan(p, W, Trace(t, z, label="Z"), Trace(t, eta, label="eta"))


def z_bounds_tight(p: ProblemParams, W: int, z_W: float, t):
    """Bounds on ``Z_t`` for ``t >= W`` given the value at the end of the window.

    The upper bound is exact; the lower bound replaces a harmonic sum by a
    logarithm and may undershoot slightly right after ``W``.
    """
    validate_params(p)
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr < W):
        raise ValueError(f"tight bounds need t >= W = {W}")
    if not 0.0 < z_W <= p.N / (p.mu * p.L) * (1 + 1e-12):
        raise ValueError("z_W must lie in (0, N/(mu L)]")
    scale = 4.0 * p.N / p.mu**2
    u = scale / z_W
    k = t_arr - W
    upper = scale / (k + u)
    lower = scale / (k + u + np.log(k + u) - math.log(u))
    if t_arr.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


def weak_validity_start(p: ProblemParams) -> float:
    """Smallest real t at which the weak upper bound's denominator is positive."""
    om = p.omega
    return (2.0 * p.L * math.log(2.0 * om * p.mu * p.L * p.Y0 / p.N - 1.0) - 4.0 * p.L * om) / p.mu


def z_bounds_weak(p: ProblemParams, t):
    """Parameter-explicit bounds on ``Z_t`` using ``omega = max{N/(mu L Y0), 1}``.

    Derived for small ``mu/(2L)``; evaluable for any valid params.
    """
    validate_params(p)
    if p.N <= 0 or p.Y0 <= 0:
        raise ParamError("weak bounds need N > 0 and Y0 > 0")
    t_arr = np.asarray(t, dtype=np.float64)
    W = compute_W(p)
    om = p.omega
    log_term = math.log(2.0 * om * p.mu * p.L * p.Y0 / p.N - 1.0)
    den_up = p.mu * t_arr - 2.0 * p.L * log_term + 4.0 * p.L * om
    if np.any(t_arr < W) or np.any(den_up <= 0):
        raise ValueError("t below validity threshold")
    scale = 4.0 * p.N / p.mu
    upper = scale / den_up
    lower = scale / (p.mu * (t_arr + np.log(t_arr * p.mu / (4.0 * p.L * om) + 1.0)) + 8.0 * p.L * om)
    if t_arr.ndim == 0:
        return float(lower), float(upper)
    return lower, upper


def oracle_greedy_bound(p: ProblemParams, t) -> float:
    """``4N/(mu^2 (t+1))``: what an oracle for ``Y_t`` buys under the same recurrence."""
    validate_params(p)
    c = 4.0 * p.N / p.mu**2
    if p.Y0 > c:
        warnings.warn(
            f"Y0={p.Y0} exceeds 4N/mu^2={c}; the greedy recursion is clamped below that value",
            RuntimeWarning,
            stacklevel=2,
        )
    t_arr = np.asarray(t, dtype=np.float64)
    out = c / (t_arr + 1.0)
    return float(out) if t_arr.ndim == 0 else out


def greedy_oracle_trace(p: ProblemParams, t_max: int) -> Trace:
    """``Y_{t+1} = Y_t - mu^2 Y_t^2/(4N)`` from ``Y0`` (clamped to just under ``4N/mu^2``)."""
    validate_params(p)
    if p.N <= 0:
        raise ParamError("greedy oracle recursion needs N > 0")
    c = 4.0 * p.N / p.mu**2
    y0 = p.Y0
    if y0 > c:
        warnings.warn("Y0 clamped to 4N/mu^2 for the greedy oracle recursion", RuntimeWarning, stacklevel=2)
        y0 = c * (1.0 - 1e-12)
    y = kernels.rational_decay(p.mu**2, 0.0, 4.0 * p.N, y0, int(t_max))
    return Trace(np.arange(t_max + 1), y, label="Y_greedy")
