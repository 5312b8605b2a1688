"""Multi-run SGD driver with pluggable stochastic-gradient oracles."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import ProblemParams, Schedule, Trace, log_grid

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20190601
THREADS_ENV = "STEPSIZE_LAB_THREADS"
DIVERGENCE_FACTOR = 1e12
CHUNK = 4096

InitialPoint = Union[np.ndarray, Callable[[np.random.Generator], np.ndarray]]


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Counter-based stream for one run: Philox keyed by ``seed XOR run``."""
    return np.random.Generator(np.random.Philox(key=(int(seed) ^ int(run)) & 0xFFFFFFFFFFFFFFFF))


def resolve_threads(requested: int | None = None) -> int:
    if requested is None:
        raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            requested = int(raw)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if requested < 0:
        raise ValueError("thread count must be >= 0")
    return requested or (os.cpu_count() or 1)


class GradientOracle:
    """Stochastic first-order oracle for ``F(w) = E f(w; xi)``.

    Subclasses implement :meth:`stochastic_gradient`; those with a compiled
    inner loop also override :meth:`advance`. Oracles are shared read-only
    across runs, all mutable state lives in the iterate and the generator.
    """

    dimension: int
    reference_optimum: np.ndarray | None = None
    params: ProblemParams | None = None

    def stochastic_gradient(self, w: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def full_gradient(self, w: np.ndarray) -> np.ndarray | None:
        return None

    def objective(self, w: np.ndarray) -> float:
        raise NotImplementedError(f"{type(self).__name__} has no objective")

    @property
    def optimal_value(self) -> float:
        return self.objective(self.reference_optimum)

    def advance(self, w: np.ndarray, etas: np.ndarray, rng: np.random.Generator) -> None:
        """Apply ``len(etas)`` SGD steps to ``w`` in place."""
        for e in etas:
            w -= e * self.stochastic_gradient(w, rng)


class QuadraticOracle(GradientOracle):
    """``f(w; xi) = 0.5 ||w - c||^2`` plus optional additive Gaussian gradient noise."""

    def __init__(self, center: Sequence[float], noise: float = 0.0):
        self.center = np.asarray(center, dtype=np.float64)
        self.dimension = self.center.size
        self.noise = float(noise)
        self.reference_optimum = self.center
        self.params = ProblemParams(mu=1.0, L=1.0, N=2.0 * self.noise**2 * self.dimension)

    def stochastic_gradient(self, w, rng):
        g = w - self.center
        if self.noise:
            g = g + self.noise * rng.standard_normal(self.dimension)
        return g

    def full_gradient(self, w):
        return w - self.center

    def objective(self, w):
        return 0.5 * float(np.dot(w - self.center, w - self.center))


@dataclass(frozen=True)
class RunConfig:
    t_max: int
    runs: int = 1
    seed: int = DEFAULT_SEED
    schedule: Schedule | np.ndarray | Sequence[float] | None = None
    record_grid: str | Sequence[int] = "log"
    per_decade: int = 200
    stride: int = 1
    metric: str = "sqdist"
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.t_max < 0:
            raise ValueError("t_max must be >= 0")
        if self.metric not in ("sqdist", "suboptimality"):
            raise ValueError(f"unknown metric {self.metric!r}")

    def grid(self) -> np.ndarray:
        if isinstance(self.record_grid, str):
            if self.record_grid == "log":
                return log_grid(self.t_max, self.per_decade)
            if self.record_grid == "linear":
                g = np.arange(0, self.t_max + 1, max(1, self.stride), dtype=np.int64)
                return g if g[-1] == self.t_max else np.append(g, self.t_max)
            raise ValueError(f"unknown grid strategy {self.record_grid!r}")
        g = np.asarray(self.record_grid, dtype=np.int64)
        if g.size and (g[0] < 0 or g[-1] > self.t_max or np.any(np.diff(g) <= 0)):
            raise ValueError("explicit grid must be increasing within [0, t_max]")
        return g

    def step_sizes(self, params: ProblemParams | None) -> np.ndarray:
        if self.schedule is None:
            raise ValueError("RunConfig.schedule is required")
        if isinstance(self.schedule, Schedule):
            if params is None:
                raise ValueError("named schedules need the oracle's ProblemParams")
            etas = self.schedule.etas(params, max(self.t_max, 1))[: self.t_max]
        else:
            etas = np.asarray(self.schedule, dtype=np.float64)
            if etas.ndim == 0:
                etas = np.full(self.t_max, float(etas))
            if etas.size < self.t_max:
                raise ValueError(f"need {self.t_max} step sizes, got {etas.size}")
            etas = etas[: self.t_max]
        if not (np.all(np.isfinite(etas)) and np.all(etas >= 0)):
            raise ValueError("step sizes must be finite and nonnegative")
        return np.ascontiguousarray(etas, dtype=np.float64)


def _metric(oracle: GradientOracle, w: np.ndarray, kind: str, f_star: float | None) -> float:
    if kind == "sqdist":
        diff = w - oracle.reference_optimum
        return float(np.dot(diff, diff))
    return max(oracle.objective(w) - f_star, 0.0)


def _single_run(oracle, w0: InitialPoint, etas, grid, cfg: RunConfig, run: int, f_star):
    rng = run_rng(cfg.seed, run)
    w = np.array(w0(rng) if callable(w0) else w0, dtype=np.float64)
    if w.shape != (oracle.dimension,):
        raise ValueError(f"w0 has shape {w.shape}, oracle dimension is {oracle.dimension}")
    limit = DIVERGENCE_FACTOR * (1.0 + float(np.linalg.norm(w)))
    out = np.empty(grid.size)
    t = 0
    for gi, target in enumerate(grid):
        while t < target:
            stop = min(target, t + CHUNK)
            oracle.advance(w, etas[t:stop], rng)
            t = stop
        norm = float(np.linalg.norm(w))
        if not math.isfinite(norm) or norm > limit:
            logger.warning("run %d diverged at t=%d", run, t)
            return None, t
        out[gi] = _metric(oracle, w, cfg.metric, f_star)
    return out, None


def run_sgd(oracle: GradientOracle, w0: InitialPoint, cfg: RunConfig, label: str = "Y_sim") -> Trace:
    """Average the configured metric over ``cfg.runs`` independent runs.

    ``w0`` is a vector or a callable drawing one from the run's generator.
    Diverged runs are dropped from the average and listed in ``meta``.
    """
    if cfg.metric == "sqdist" and oracle.reference_optimum is None:
        raise ValueError("squared-distance metric needs oracle.reference_optimum")
    f_star = oracle.optimal_value if cfg.metric == "suboptimality" else None
    etas = cfg.step_sizes(oracle.params)
    grid = cfg.grid()
    threads = min(resolve_threads(cfg.threads), cfg.runs)

    def job(run: int):
        return _single_run(oracle, w0, etas, grid, cfg, run, f_star)

    if threads <= 1:
        results = [job(r) for r in range(cfg.runs)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(job, range(cfg.runs)))

    kept = [vals for vals, _ in results if vals is not None]
    diverged = {r: t for r, (vals, t) in enumerate(results) if vals is None}
    if not kept:
        raise RuntimeError(f"all {cfg.runs} runs diverged")
    stack = np.vstack(kept)
    mean = stack.mean(axis=0)
    stderr = stack.std(axis=0, ddof=1) / math.sqrt(len(kept)) if len(kept) > 1 else None
    meta = {"runs": cfg.runs, "seed": cfg.seed, "diverged_runs": diverged, "per_run": stack}
    return Trace(grid, mean, stderr, label, meta)
