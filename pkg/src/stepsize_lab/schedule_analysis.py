"""Continuous-time view of a diminishing schedule.

With ``n(t) = mu * eta_t`` and ``M(t)`` its integral from 1, the expected
squared distance is driven by
``C(t) = exp(-M(t)) * int_1^t exp(M(x)) n(x)^2 dx``, which satisfies
``dC/dt = n (n - C)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize

from . import kernels
from .core import Family, ParamError, ProblemParams, Schedule, Trace, validate_params

ABS_TOL = 1e-10
EVAL_BUDGET = 1_000_000
ROOT_TOL = 1e-10


class QuadratureError(ArithmeticError):
    """Adaptive quadrature exhausted its budget before reaching tolerance."""


@dataclass(frozen=True)
class ContinuousSchedule:
    n: Callable[[float], float]
    closed_form_M: Callable[[float], float] | None = None
    domain_start: float = 1.0
    label: str = ""

    @classmethod
    def power_law(cls, scale: float, q: float, K: float = 0.0) -> "ContinuousSchedule":
        """``n(t) = scale / (K + t)**q`` with analytic ``M``."""
        if scale <= 0 or q <= 0 or K + 1.0 <= 0:
            raise ValueError("need scale > 0, q > 0 and K > -1")
        if q == 1.0:
            def M(t: float) -> float:
                return scale * math.log((K + t) / (K + 1.0))
        else:
            def M(t: float) -> float:
                return scale * ((K + t) ** (1.0 - q) - (K + 1.0) ** (1.0 - q)) / (1.0 - q)

        return cls(lambda t: scale / (K + t) ** q, M, 1.0, f"{scale:g}/(K+t)^{q:g}")

    @classmethod
    def from_schedule(cls, sched: Schedule, p: ProblemParams) -> "ContinuousSchedule":
        """``n(t) = mu * eta_t`` for a power-law or candidate :class:`Schedule`, read at real ``t``."""
        if sched.family is Family.POWER_LAW:
            return cls.power_law(p.mu, sched.q, sched.power_offset(p))
        if sched.family is Family.APPROX_CANDIDATE:
            return cls.power_law(2.0, 1.0, 4.0 * p.L / p.mu)
        raise ValueError(f"no continuous extension for family {sched.family.value!r}")


def _quad(f: Callable[[float], float], a: float, b: float, epsabs: float, epsrel: float) -> float:
    """Adaptive Gauss-Kronrod over geometrically growing pieces of ``[a, b]``."""
    if b <= a:
        return 0.0
    edges = [a]
    while edges[-1] < b:
        nxt = max(2.0 * edges[-1], edges[-1] + 1.0)
        edges.append(min(nxt, b))
    total, evals, err_total = 0.0, 0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err, info = integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel,
                                            limit=200, full_output=1)[:3]
        evals += info["neval"]
        total += val
        err_total += err
        if evals > EVAL_BUDGET:
            raise QuadratureError(f"evaluation budget exhausted; estimated error {err_total:.3g}")
    if err_total > max(epsabs * len(edges), epsrel * abs(total)) * 100:
        raise QuadratureError(f"quadrature did not converge; estimated error {err_total:.3g}")
    return total


def big_m(s: ContinuousSchedule, t: float) -> float:
    if t < s.domain_start:
        raise ValueError(f"t must be >= {s.domain_start}")
    if s.closed_form_M is not None:
        return float(s.closed_form_M(t))
    return _quad(s.n, s.domain_start, t, ABS_TOL, 1e-12)


def big_m_inverse(s: ContinuousSchedule, m: float) -> float:
    """``M^{-1}(m)`` by bracketed root-finding with a doubling upper end."""
    if m < 0:
        raise ValueError("M^{-1} undefined below 0")
    if m == 0:
        return s.domain_start
    lo, hi = s.domain_start, s.domain_start + 1.0
    while big_m(s, hi) < m:
        lo, hi = hi, s.domain_start + 2.0 * (hi - s.domain_start)
        if hi > 1e300:
            raise ValueError(f"M never reaches {m}")
    return optimize.brentq(lambda y: big_m(s, y) - m, lo, hi, xtol=ROOT_TOL * max(1.0, lo), rtol=1e-15)


def c_of_t(s: ContinuousSchedule, t: float) -> float:
    """``C(t)``; the integrand is carried as ``exp(M(x) - M(t))`` to avoid overflow."""
    if t < s.domain_start:
        raise ValueError(f"t must be >= {s.domain_start}")
    if t == s.domain_start:
        return 0.0
    m_t = big_m(s, t)
    if s.closed_form_M is not None:
        def f(x: float) -> float:
            return math.exp(s.closed_form_M(x) - m_t) * s.n(x) ** 2
    else:
        def f(x: float) -> float:
            return math.exp(-_quad(s.n, x, t, 1e-13, 1e-12)) * s.n(x) ** 2
    return _quad(f, s.domain_start, t, 1e-14, 1e-11)


def convergence_rate_bound(s: ContinuousSchedule, p: ProblemParams, t: int) -> float:
    """Upper bound on ``Z_{t+1}`` for ``Z_1 = Y0``, ``Z_{j+1} = (1 - n_j) Z_j + eta_j^2 N``.

    The noise enters as ``N / mu^2`` because ``eta_j^2 = n_j^2 / mu^2``.
    """
    validate_params(p)
    if t < 1:
        raise ValueError("t must be >= 1")
    noise = p.N / p.mu**2
    n1 = s.n(s.domain_start)
    m_next = big_m(s, t + 1)
    arg = math.log(s.n(t + 1) / n1) + m_next
    # arg is exactly 0 for n = 1/(K + x); keep that case despite rounding
    if abs(arg) <= 1e-12 * max(1.0, m_next):
        arg = 0.0
    if arg < 0:
        raise ParamError(f"bound inapplicable at t={t}")
    y = big_m_inverse(s, arg)
    head = noise * math.exp(n1) * 2.0 * s.n(y)
    tail = math.exp(-m_next) * (math.exp(big_m(s, 2.0)) * n1**2 * noise + p.Y0)
    return head + tail


def _check_decreasing(s: ContinuousSchedule, t_max: float) -> None:
    xs = np.geomspace(s.domain_start, t_max, 64)
    vals = np.array([s.n(x) for x in xs])
    if np.any(vals <= 0) or np.any(np.diff(vals) >= 0):
        raise ValueError("n must be positive and strictly decreasing")


def find_crossing(s: ContinuousSchedule, t_max: float) -> float | None:
    """First ``T`` in ``[1, t_max]`` with ``C(T) = n(T)``, or ``None``."""
    _check_decreasing(s, t_max)

    def gap(x: float) -> float:
        return c_of_t(s, x) - s.n(x)

    # C(1) = 0 < n(1); scan a geometric grid for the first sign change
    xs = np.unique(np.concatenate((np.geomspace(s.domain_start, t_max, 200), [t_max])))
    prev = xs[0]
    for x in xs[1:]:
        if gap(x) > 0:
            return optimize.bisect(gap, prev, x, xtol=1e-8 * max(1.0, prev), rtol=1e-12)
        prev = x
    return None


@dataclass(frozen=True)
class DivergenceReport:
    k: float
    t_max: int
    partial_sum: float
    integral_bound: float
    verdict: str
    note: str = ""


def divergence_test(k: float, t_max: int) -> DivergenceReport:
    """Summability of ``1/(t ln^k t)`` from ``t = 3``.

    A summable step sequence leaves the total travel finite, so the iterate
    cannot reach the optimum from far enough away.
    """
    if t_max < 3:
        raise ValueError("t_max must be >= 3")
    t = np.arange(3, t_max + 1, dtype=np.float64)
    partial = float(math.fsum(1.0 / (t * np.log(t) ** k)))
    if k <= 1:
        return DivergenceReport(k, t_max, partial, math.inf, "diverges",
                                "comparison with the harmonic series: the integral of 1/(t ln^k t) is unbounded")
    bound = 1.0 / (k - 1.0)
    # sum_{t>=3} f(t) <= int_e^inf f since f is decreasing and 3 > e
    verdict = "converges" if partial <= bound else "diverges"
    return DivergenceReport(k, t_max, partial, bound, verdict,
                            f"partial sums are increasing and bounded by {bound:.17g}")


def family_compare(p: ProblemParams, qs: Sequence[float], t_max: int) -> dict[float, Trace]:
    """Iterate ``Z_{t+1} = (1 - mu eta_t) Z_t + eta_t^2 N`` for each power-law exponent."""
    validate_params(p)
    out: dict[float, Trace] = {}
    for q in qs:
        sched = Schedule.power_law(q)
        etas = sched.etas(p, t_max)[:t_max]
        z = kernels.affine_recurrence(etas, p.mu, 0.0, p.N, p.Y0)
        out[q] = Trace(np.arange(t_max + 1), z, None, sched.label, {"q": q, "K": sched.power_offset(p)})
    return out
