import os
from pathlib import Path

import numpy as np
import pytest

from stepsize_lab.core import ProblemParams

DATA = Path(__file__).parent / "data"


def pytest_configure(config):
    config._criteria = []


@pytest.fixture
def record_criterion(request):
    """Store a one-line verdict for the terminal summary."""

    def record(label: str, ok: bool, detail: str = "") -> bool:
        request.config._criteria.append((label, ok, detail))
        print(f"criterion {label}: {'PASS' if ok else 'FAIL'} {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in rows:
        terminalreporter.write_line(f"criterion {label:<12} {'PASS' if ok else 'FAIL'}  {detail}")


def random_params(rng: np.random.Generator, max_ratio: float | None = None) -> ProblemParams:
    """Log-uniform draws over a few decades; ``max_ratio`` caps ``mu/(2L)``."""
    mu = 10 ** rng.uniform(-3, 0)
    kappa = 10 ** rng.uniform(0, 3)
    if max_ratio is not None:
        kappa = max(kappa, 1.0 / (2.0 * max_ratio))
    return ProblemParams(mu, mu * kappa, 10 ** rng.uniform(-3, 2), 10 ** rng.uniform(-2, 2))


@pytest.fixture
def data_dir() -> Path:
    return DATA


@pytest.fixture(autouse=True)
def _single_thread_default(monkeypatch):
    if "STEPSIZE_LAB_THREADS" not in os.environ:
        monkeypatch.setenv("STEPSIZE_LAB_THREADS", "1")
