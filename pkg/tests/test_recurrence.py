import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from stepsize_lab import recurrence as rec
from stepsize_lab.core import ParamError, ProblemParams

P = ProblemParams(1.0, 2.0, 8.0, 10.0)


def direct(p, t_max):
    z, etas = [p.Y0], []
    for _ in range(t_max):
        e = min(1 / (2 * p.L), p.mu * z[-1] / (2 * p.N))
        etas.append(e)
        z.append((1 - p.mu * e) * z[-1] + e * e * p.N)
    return np.array(z), np.array(etas)


def test_window_formula_example():
    # 2 mu L Y0 / N - 1 = 4, contraction 1 - mu/(2L) = 3/4
    assert rec.compute_W(P) == math.ceil(math.log(4) / math.log(4 / 3))


def test_window_zero_when_noise_dominates():
    assert rec.compute_W(ProblemParams(1.0, 2.0, 100.0, 1.0)) == 0
    assert rec.compute_W(ProblemParams(1.0, 2.0, 1.0, 0.0)) == 0


def test_window_infinite_without_noise():
    with pytest.raises(ParamError, match="infinite window"):
        rec.compute_W(ProblemParams(1.0, 2.0, 0.0, 1.0))
    assert rec.iterate_plan(ProblemParams(1.0, 2.0, 0.0, 1.0), 5).W is None


def test_iterate_plan_matches_direct_loop():
    plan = rec.iterate_plan(P, 500)
    z, etas = direct(P, 500)
    np.testing.assert_allclose(plan.z.value, z, rtol=1e-14)
    np.testing.assert_allclose(plan.eta.value[:-1], etas, rtol=1e-14)


def test_eta_switches_at_window():
    plan = rec.iterate_plan(P, 50)
    W = plan.W
    assert np.all(plan.eta.value[:W] == 1 / (2 * P.L))
    assert np.all(plan.eta.value[W:] < 1 / (2 * P.L))


def test_prewindow_closed_form():
    for t in range(rec.compute_W(P) + 1):
        assert rec.z_closed_form_prewindow(P, t) == pytest.approx(rec.iterate_plan(P, t).z.value[t], rel=1e-13)
    with pytest.raises(ValueError):
        rec.z_closed_form_prewindow(P, rec.compute_W(P) + 1)


def test_tight_upper_is_valid_everywhere():
    plan = rec.iterate_plan(P, 5000)
    t = np.arange(plan.W, 5001)
    _, hi = rec.z_bounds_tight(P, plan.W, plan.z.value[plan.W], t)
    assert np.all(plan.z.value[t] <= hi * (1 + 1e-12))


def test_weak_bounds_reject_early_t():
    p = ProblemParams(1e-3, 1.0, 1e-3, 10.0)
    with pytest.raises(ValueError, match="validity"):
        rec.z_bounds_weak(p, 0)


def test_greedy_oracle_matches_closed_bound_order():
    p = ProblemParams(0.1, 1.0, 1.0, 10.0)
    tr = rec.greedy_oracle_trace(p, 1000)
    assert np.all(np.diff(tr.value) <= 0)
    # Y_t <= 4N/(mu^2 (t + 1)) once Y_0 is below 4N/mu^2
    assert np.all(tr.value <= rec.oracle_greedy_bound(p, tr.t) * (1 + 1e-12))


def test_greedy_oracle_warns_when_clamped():
    with pytest.warns(RuntimeWarning):
        rec.greedy_oracle_trace(ProblemParams(1.0, 1.0, 1e-3, 10.0), 3)


def test_unroll_length_mismatch():
    with pytest.raises(ValueError):
        rec.unroll_recurrence([0.5, 0.5], [0.1], 1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 0.999), st.floats(0, 10)), min_size=0, max_size=64),
       st.floats(0, 100))
def test_unroll_property(pairs, y1):
    beta = [b for b, _ in pairs]
    gamma = [g for _, g in pairs]
    y = y1
    for b, g in pairs:
        y = b * y + g
    assert rec.unroll_recurrence(beta, gamma, y1) == pytest.approx(y, rel=1e-12, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-3, 1.0), st.floats(1.0, 100.0), st.floats(1e-3, 10.0), st.floats(1e-2, 10.0))
def test_plan_nonincreasing_after_window(mu, kappa, N, Y0):
    p = ProblemParams(mu, mu * kappa, N, Y0)
    plan = rec.iterate_plan(p, 300)
    z = plan.z.value[plan.W:]
    assert np.all(np.diff(z) <= 1e-15 * z[:-1])
