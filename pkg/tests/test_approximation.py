import math

import numpy as np
import pytest

from conftest import random_params
from stepsize_lab import approximation as ap
from stepsize_lab import recurrence as rec
from stepsize_lab.core import ParamError, ProblemParams


def test_t_prime_regimes():
    assert ap.t_prime(ProblemParams(1e-3, 1.0, 1.0, 1.0)) == 0.0
    assert ap.t_prime(ProblemParams(1.0, 2.0, 8.0, 10.0)) == pytest.approx(8 * 2.5 - 8)
    with pytest.raises(ParamError):
        ap.t_prime(ProblemParams(1.0, 2.0, 0.0, 10.0))


def test_z_prime_bound_rejects_early_t():
    p = ProblemParams(1.0, 2.0, 8.0, 10.0)
    with pytest.raises(ValueError, match="not yet valid"):
        ap.z_prime_bound(p, 11)
    assert ap.z_prime_bound(p, 12) == pytest.approx(128 / 8)


def test_window_never_exceeds_t_prime():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        p = random_params(rng)
        assert rec.compute_W(p) <= math.ceil(ap.t_prime(p))


def test_candidate_recurrence_stays_below_z_prime():
    # iterate the recurrence under eta' and compare with the closed bound
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = random_params(rng, max_ratio=0.05)
        T = 4000
        t = np.arange(T, dtype=float)
        etas = ap.eta_prime(p, t)
        z = [p.Y0]
        for e in etas:
            z.append((1 - p.mu * e) * z[-1] + e * e * p.N)
        z = np.array(z)
        start = math.ceil(ap.t_prime(p))
        if start > T:
            continue
        tt = np.arange(start, T + 1)
        assert np.all(z[tt] <= ap.z_prime_bound(p, tt) * (1 + 1e-12))


def test_certificate_values():
    p = ProblemParams(1e-3, 1.0, 1.0, 1.0)
    cert = ap.ratio_certificate(p, 3)
    assert cert.t_threshold == 4000
    assert cert.ratio_bound == pytest.approx(4 * (3 + 2 * 999) / 2)
    small = ap.ratio_certificate(ProblemParams(1e-3, 1.0, 1e-4, 1.0), 100)
    assert small.ratio_bound == pytest.approx(400 / 99)


def test_certificate_rejects_small_q_and_warns():
    with pytest.raises(ValueError):
        ap.ratio_certificate(ProblemParams(1e-3, 1.0, 1.0, 1.0), 1.5)
    with pytest.warns(RuntimeWarning):
        ap.ratio_certificate(ProblemParams(1.0, 2.0, 8.0, 10.0), 3)
