"""Shared value types: problem constants, step-size schedules and traces."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np


class ParamError(ValueError):
    """Raised when problem constants violate their invariants."""


@dataclass(frozen=True)
class ProblemParams:
    """Constants of a strongly convex stochastic problem.

    ``N`` is twice the second moment of the stochastic gradient at the
    optimum and ``Y0`` the expected squared distance of the starting point.
    """

    mu: float
    L: float
    N: float = 0.0
    Y0: float = 0.0

    @property
    def kappa(self) -> float:
        return self.L / self.mu

    @property
    def omega(self) -> float:
        """``max{N/(mu L Y0), 1}``; infinite ratio counts as large."""
        if self.Y0 == 0.0:
            return math.inf if self.N > 0 else 1.0
        return max(self.N / (self.mu * self.L * self.Y0), 1.0)


def validate_params(p: ProblemParams) -> ProblemParams:
    for name in ("mu", "L", "N", "Y0"):
        value = getattr(p, name)
        if not isinstance(value, (int, float)) or isinstance(value, bool) or not math.isfinite(value):
            raise ParamError(f"{name} must be a finite real, got {value!r}")
    if p.mu <= 0:
        raise ParamError(f"mu must be positive, got {p.mu}")
    if p.L <= 0:
        raise ParamError(f"L must be positive, got {p.L}")
    if p.L < p.mu:
        raise ParamError(f"mu <= L required, got mu={p.mu}, L={p.L}")
    if p.N < 0:
        raise ParamError(f"N must be nonnegative, got {p.N}")
    if p.Y0 < 0:
        raise ParamError(f"Y0 must be nonnegative, got {p.Y0}")
    return p


class Family(enum.Enum):
    OPTIMAL = "optimal"
    APPROX_CANDIDATE = "prime"
    POWER_LAW = "power"
    GOWER_PIECEWISE = "gower"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Schedule:
    """A named step-size family, evaluated for a given :class:`ProblemParams`.

    Build instances with the class methods rather than directly.
    """

    family: Family
    q: float = 1.0
    K: float | None = None
    fn: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)
    label: str = ""

    @classmethod
    def optimal(cls) -> "Schedule":
        return cls(Family.OPTIMAL, label="eta_opt")

    @classmethod
    def approx_candidate(cls) -> "Schedule":
        return cls(Family.APPROX_CANDIDATE, label="eta_prime")

    @classmethod
    def power_law(cls, q: float, K: float | None = None) -> "Schedule":
        if not 0.0 < q <= 1.0:
            raise ValueError(f"power-law exponent q must lie in (0, 1], got {q}")
        if K is not None and K < 0:
            raise ValueError(f"K must be nonnegative, got {K}")
        return cls(Family.POWER_LAW, q=q, K=K, label=f"power_q{q:g}")

    @classmethod
    def gower(cls) -> "Schedule":
        return cls(Family.GOWER_PIECEWISE, label="gower")

    @classmethod
    def custom(cls, fn: Callable[[np.ndarray], np.ndarray], label: str = "custom") -> "Schedule":
        return cls(Family.CUSTOM, fn=fn, label=label)

    def power_offset(self, p: ProblemParams) -> float:
        """Offset ``K`` with ``1/K**q <= 1/(2L)``; defaults to equality."""
        if self.K is not None:
            if self.K ** self.q < 2.0 * p.L * (1 - 1e-12):
                raise ValueError(f"K={self.K} gives eta_0 > 1/(2L) for L={p.L}")
            return self.K
        return (2.0 * p.L) ** (1.0 / self.q)

    def etas(self, p: ProblemParams, t_max: int) -> np.ndarray:
        """Step sizes ``eta_0 .. eta_{t_max}``."""
        validate_params(p)
        t = np.arange(t_max + 1, dtype=np.float64)
        if self.family is Family.OPTIMAL:
            from .recurrence import iterate_plan

            out = iterate_plan(p, t_max).eta.value
        elif self.family is Family.APPROX_CANDIDATE:
            out = 2.0 / (p.mu * t + 4.0 * p.L)
        elif self.family is Family.POWER_LAW:
            out = 1.0 / (self.power_offset(p) + t) ** self.q
        elif self.family is Family.GOWER_PIECEWISE:
            switch = 4.0 * p.L / p.mu
            with np.errstate(divide="ignore"):
                late = (2.0 * t + 1.0) / ((t + 1.0) ** 2 * p.mu)
            out = np.where(t <= switch, 1.0 / (2.0 * p.L), late)
        else:
            assert self.fn is not None
            out = np.asarray(self.fn(t), dtype=np.float64)
            if out.shape != t.shape:
                out = np.broadcast_to(out, t.shape).copy()
        if not (np.all(np.isfinite(out)) and np.all(out > 0)):
            raise ValueError(f"schedule {self.label or self.family.value} produced a non-positive step")
        return out

    def eta(self, p: ProblemParams, t: int) -> float:
        return float(self.etas(p, t)[t])


@dataclass(frozen=True)
class Trace:
    """Ordered ``(t, value)`` samples, optionally with a standard error column."""

    t: np.ndarray
    value: np.ndarray
    stderr: np.ndarray | None = None
    label: str = ""
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=np.int64)
        v = np.asarray(self.value, dtype=np.float64)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "value", v)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValueError("t and value must be 1-d arrays of equal length")
        if t.size and (t[0] < 0 or np.any(np.diff(t) <= 0)):
            raise ValueError("trace t must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError(f"trace {self.label!r} has negative or non-finite values")
        if self.stderr is not None:
            se = np.asarray(self.stderr, dtype=np.float64)
            if se.shape != v.shape:
                raise ValueError("stderr must match value shape")
            object.__setattr__(self, "stderr", se)

    def __len__(self) -> int:
        return int(self.t.size)

    def at(self, t: int) -> float:
        i = np.searchsorted(self.t, t)
        if i >= self.t.size or self.t[i] != t:
            raise KeyError(t)
        return float(self.value[i])

    def subsample(self, grid: Sequence[int] | np.ndarray) -> "Trace":
        idx = np.searchsorted(self.t, grid)
        se = None if self.stderr is None else self.stderr[idx]
        return Trace(self.t[idx], self.value[idx], se, self.label, dict(self.meta))

    def to_csv(self) -> str:
        return format_csv(
            ["t", "value", "stderr"],
            [
                [int(t), float(v), None if self.stderr is None else float(s)]
                for t, v, s in zip(self.t, self.value,
                                   self.stderr if self.stderr is not None else [None] * len(self))
            ],
        )


def fmt_float(x: float | None) -> str:
    """17 significant digits, empty for missing values."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def format_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(x) if not isinstance(x, str) else x for x in row])
    return buf.getvalue()


def format_json(header: Sequence[str], rows: Sequence[Sequence[Any]], extra: dict[str, Any] | None = None) -> str:
    def conv(x: Any) -> Any:
        if x is None:
            return None
        if isinstance(x, str):
            return x
        if isinstance(x, (int, np.integer)):
            return int(x)
        x = float(x)
        return None if math.isnan(x) else x

    records = [{h: conv(x) for h, x in zip(header, row)} for row in rows]
    doc: Any = records if extra is None else {**extra, "rows": records}
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def log_grid(t_max: int, per_decade: int = 200) -> np.ndarray:
    """Integer grid ``0, 1, ...`` thinned to at most ``per_decade`` points per decade."""
    if t_max < 0:
        return np.zeros(0, dtype=np.int64)
    if t_max == 0:
        return np.zeros(1, dtype=np.int64)
    decades = math.log10(t_max)
    pts = np.logspace(0.0, decades, max(2, int(math.ceil(decades * per_decade)) + 1))
    grid = np.unique(np.concatenate(([0, t_max], np.round(pts).astype(np.int64))))
    return grid[grid <= t_max]
