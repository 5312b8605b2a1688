"""Constants of the dimension-dependent prior lower bound and the resulting gap factors.

The prior bound reads ``c(d) * N / (mu^2 t)`` with ``c(d) = log2(2/sqrt(e)) / (432 d)``;
the base-2 logarithm is the reading that yields the quoted ``775 d`` gap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

OUR_COEFFICIENT = 0.5
SCHEDULE_FACTOR = 32.0


@dataclass(frozen=True)
class PriorBoundParams:
    d: int
    delta: float
    theta: float
    c: float = 1.0
    r: float = 1.0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if not 0.0 < self.delta <= 0.25:
            raise ValueError("delta must lie in (0, 1/4]")
        if not 0.0 <= self.theta < 1.0:
            raise ValueError("theta must lie in [0, 1)")

    @property
    def beta(self) -> float:
        return beta(self.delta, self.theta)

    @property
    def N(self) -> float:
        return 2.0 * self.beta * self.c**2 * self.r**2


def prior_lower_constant(d: int) -> float:
    if d < 1:
        raise ValueError("d must be >= 1")
    return math.log2(2.0 / math.sqrt(math.e)) / (432.0 * d)


def beta(delta, theta):
    out = np.maximum(0.5 - np.asarray(delta), (0.25 - np.asarray(delta) ** 2) * (1.0 + np.asarray(theta)) ** 2)
    return float(out) if np.ndim(out) == 0 else out


def beta_optimum(resolution: float = 1e-3) -> tuple[float, float, float]:
    """Grid search for ``min beta``; returns ``(delta, largest optimal theta, beta)``."""
    k = int(round(0.25 / resolution))
    deltas = np.linspace(0.25 / k, 0.25, k)
    thetas = np.arange(0.0, 1.0, resolution)
    vals = beta(deltas[:, None], thetas[None, :])
    best = vals.min()
    di, ti = np.nonzero(vals <= best + 1e-15)
    pick = np.lexsort((-thetas[ti], -deltas[di]))[0]
    return float(deltas[di[pick]]), float(thetas[ti[pick]]), float(best)


def beta_optimum_closed_form() -> tuple[float, float, float]:
    """At ``delta = 1/4`` the first branch is 1/4 and the second stays below it up to ``theta = 2/sqrt(3) - 1``."""
    return 0.25, 2.0 / math.sqrt(3.0) - 1.0, 0.25


def comparison_report(d: int) -> list[tuple[str, float]]:
    prior = prior_lower_constant(d)
    gap = OUR_COEFFICIENT / prior
    return [
        ("our_lower_coefficient", OUR_COEFFICIENT),
        ("prior_coefficient", prior),
        ("gap", gap),
        ("schedule_optimality_factor", SCHEDULE_FACTOR),
        ("composite", SCHEDULE_FACTOR * gap),
    ]
