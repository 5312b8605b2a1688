"""Gaussian example on which the oracle-optimal step sizes are provably tight.

Component functions are ``f(w; xi) = s(xi) * ||w - xi||^2 / 2`` with
``xi ~ N(m, diag(sigma))`` and a random curvature scale ``s`` drawn from a
two-component uniform mixture with mean ``mu`` and support ``[0, L]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import ParamError, ProblemParams, Schedule, Trace
from .engine import CHUNK, DEFAULT_SEED, GradientOracle, RunConfig, run_sgd


@dataclass(frozen=True)
class TightnessModel:
    d: int
    m: np.ndarray
    sigma_diag: np.ndarray
    mu: float
    L: float

    def __post_init__(self) -> None:
        m = np.ascontiguousarray(self.m, dtype=np.float64)
        sig = np.ascontiguousarray(self.sigma_diag, dtype=np.float64)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma_diag", sig)
        if m.shape != (self.d,) or sig.shape != (self.d,):
            raise ParamError(f"m and sigma_diag must have length d={self.d}")
        if np.any(sig <= 0) or not np.all(np.isfinite(sig)):
            raise ParamError("sigma_diag entries must be positive and finite")
        if not (0 < self.mu and 18.0 * self.mu < self.L):
            raise ParamError(f"need 0 < mu < L/18, got mu={self.mu}, L={self.L}")

    @classmethod
    def reference_config(cls, n: int = 1000, d: int = 10, seed: int = DEFAULT_SEED) -> "TightnessModel":
        """``mu = 1/n``, ``L = 1``, mean and variances uniform on ``[0, 1]``."""
        rng = np.random.default_rng(seed)
        return cls(d, rng.uniform(0.0, 1.0, d), rng.uniform(0.0, 1.0, d), 1.0 / n, 1.0)

    @property
    def trace(self) -> float:
        return float(np.sum(self.sigma_diag))

    @property
    def second_moment(self) -> float:
        """Nominal ``E[s^2]`` behind ``N`` and the exact trace; see :func:`mixture_second_moment`."""
        return self.mu * self.L**2 / (12.0 * (self.L - self.mu))

    @property
    def params(self) -> ProblemParams:
        N, Y0, _, _ = derived_constants(self)
        return ProblemParams(self.mu, self.L, N, Y0)


def mixture_second_moment(mu: float, L: float) -> float:
    """Actual ``E[s^2]`` of the mixture: ``mu L^2 / (3 (L - mu))``.

    Four times :attr:`TightnessModel.second_moment`, which uses ``a^2/12``
    (the variance of ``U[0, a]``) in place of its second moment ``a^2/3``.
    """
    return mu * L**2 / (3.0 * (L - mu))


def draw_scales(rng: np.random.Generator, mu: float, L: float, size: int) -> np.ndarray:
    u = rng.random(size)
    wide = rng.random(size) < mu / L
    return np.where(wide, L * u, (mu / (1.0 - mu / L)) * u)


class ScaleSampler:
    def __init__(self, mu: float, L: float, rng_seed: int = DEFAULT_SEED):
        if not 0 < mu < L:
            raise ParamError("need 0 < mu < L")
        self.mu, self.L, self.rng_seed = mu, L, rng_seed
        self._rng = np.random.Generator(np.random.Philox(key=rng_seed & 0xFFFFFFFFFFFFFFFF))

    def sample_scale(self) -> float:
        return float(draw_scales(self._rng, self.mu, self.L, 1)[0])

    def draw(self, size: int) -> np.ndarray:
        return draw_scales(self._rng, self.mu, self.L, size)


def derived_constants(tm: TightnessModel) -> tuple[float, float, float, float]:
    """``(N, Y0, omega, W_rec)``."""
    tr = tm.trace
    N = 2.0 * tm.second_moment * tr
    omega = max(N / (tm.mu * tm.L * tr), 1.0)
    W_rec = (2.0 * tm.L / tm.mu) * math.log(2.0 * omega * tm.mu * tm.L * tr / N - 1.0)
    return N, tr, omega, W_rec


def one_step_map(tm: TightnessModel, y: float, eta: float) -> float:
    """Expected ``Y_{t+1}`` after one step of size ``eta`` from ``Y_t = y``."""
    N = 2.0 * tm.second_moment * tm.trace
    return (1.0 - 2.0 * tm.mu * eta + eta**2 * tm.second_moment) * y + eta**2 * N / 2.0


def oracle_step(tm: TightnessModel, y_t: float) -> float:
    if y_t < 0:
        raise ValueError("y_t must be nonnegative")
    N = 2.0 * tm.second_moment * tm.trace
    return 2.0 * tm.mu * y_t / (N + 2.0 * tm.second_moment * y_t)


def exact_y_trace(tm: TightnessModel, t_max: int) -> Trace:
    N, Y0, _, _ = derived_constants(tm)
    y = kernels.rational_decay(2.0 * tm.mu**2, N / Y0, N, Y0, t_max)
    return Trace(np.arange(t_max + 1), y, None, "Y_exact")


def oracle_etas(tm: TightnessModel, t_max: int) -> np.ndarray:
    """Step sizes ``oracle_step(Y_t)`` along the exact trace, ``t < t_max``."""
    y = exact_y_trace(tm, max(t_max - 1, 0)).value[:t_max]
    N = 2.0 * tm.second_moment * tm.trace
    return 2.0 * tm.mu * y / (N + 2.0 * tm.second_moment * y)


def tight_lower(tm: TightnessModel, t):
    N = 2.0 * tm.second_moment * tm.trace
    W = tm.L**2 / (12.0 * (tm.L - tm.mu))
    t = np.asarray(t, dtype=np.float64)
    out = (N / (2.0 * tm.mu)) / (tm.mu * t + 2.0 * tm.mu * np.log1p(t) + W)
    return float(out) if out.ndim == 0 else out


def tight_upper_start(tm: TightnessModel) -> float:
    return 20.0 * tm.L / tm.mu


def tight_upper(tm: TightnessModel, t):
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < tight_upper_start(tm) * (1 - 1e-12)):
        raise ValueError(f"t below threshold 20L/mu = {tight_upper_start(tm):.6g}")
    N = 2.0 * tm.second_moment * tm.trace
    out = (16.0 * N / tm.mu) / (tm.mu * t - 16.0 * tm.L)
    return float(out) if out.ndim == 0 else out


class TightnessOracle(GradientOracle):
    """Stochastic gradients ``s (w - xi)`` of the model, with a compiled block update."""

    def __init__(self, tm: TightnessModel):
        self.tm = tm
        self.dimension = tm.d
        self.reference_optimum = tm.m
        self.params = tm.params
        self._sd = np.sqrt(tm.sigma_diag)

    def draw_xi(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        shape = (self.tm.d,) if size is None else (size, self.tm.d)
        return self.tm.m + self._sd * rng.standard_normal(shape)

    def stochastic_gradient(self, w, rng):
        s = draw_scales(rng, self.tm.mu, self.tm.L, 1)[0]
        return s * (w - self.draw_xi(rng))

    def full_gradient(self, w):
        return self.tm.mu * (w - self.tm.m)

    def objective(self, w):
        diff = w - self.tm.m
        return 0.5 * self.tm.mu * (float(np.dot(diff, diff)) + self.tm.trace)

    def advance(self, w, etas, rng):
        for start in range(0, len(etas), CHUNK):
            block = np.ascontiguousarray(etas[start:start + CHUNK])
            k = block.size
            scales = draw_scales(rng, self.tm.mu, self.tm.L, k)
            kernels.quadratic_block(w, block, scales, np.ascontiguousarray(self.draw_xi(rng, k)))


def simulate_sgd_runs(
    tm: TightnessModel,
    schedule: Schedule | np.ndarray | Sequence[float],
    t_max: int,
    runs: int,
    seed: int = DEFAULT_SEED,
    record_grid: str | Sequence[int] = "log",
    threads: int | None = None,
) -> Trace:
    """Average ``||w_t - m||^2`` over runs started at ``w0 = xi ~ N(m, Sigma)``."""
    oracle = TightnessOracle(tm)
    cfg = RunConfig(t_max=t_max, runs=runs, seed=seed, schedule=schedule,
                    record_grid=record_grid, threads=threads)
    return run_sgd(oracle, oracle.draw_xi, cfg, label="Y_sim")
