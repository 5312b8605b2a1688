import math

import pytest

from stepsize_lab import bound_compare as bc


def test_prior_constant_d1():
    assert bc.prior_lower_constant(1) == pytest.approx((1 - math.log2(math.e) / 2) / 432)
    assert bc.prior_lower_constant(1) == pytest.approx(6.452e-4, rel=1e-3)


def test_constant_times_d_is_invariant():
    base = bc.prior_lower_constant(1)
    for d in (2, 10, 1000):
        assert bc.prior_lower_constant(d) * d == pytest.approx(base, rel=1e-15)


def test_natural_log_would_not_give_775():
    alt = 0.5 / (math.log(2 / math.sqrt(math.e)) / 432)
    assert abs(alt - 775.3) > 300


def test_beta_values():
    assert bc.beta(0.0, 0.0) == 0.5
    d, th, b = bc.beta_optimum_closed_form()
    assert (0.25 - d**2) * (1 + th) ** 2 == pytest.approx(0.25, rel=1e-12)


def test_beta_grid_matches_closed_form():
    d, th, b = bc.beta_optimum()
    cd, cth, cb = bc.beta_optimum_closed_form()
    assert d == pytest.approx(cd, abs=1e-12) and b == pytest.approx(cb, abs=1e-12)
    assert th <= cth < th + 1e-3


def test_prior_params_validation():
    with pytest.raises(ValueError):
        bc.PriorBoundParams(1, 0.0, 0.1)
    p = bc.PriorBoundParams(3, 0.25, 0.1, c=2.0, r=0.5)
    assert p.N == pytest.approx(2 * 0.25 * 4 * 0.25)


@pytest.mark.parametrize("d, rounded", [(1, 775.3), (10, 7753), (100, 77530)])
def test_report(d, rounded):
    rep = dict(bc.comparison_report(d))
    gap = 216 * d / math.log2(2 / math.sqrt(math.e))
    assert rep["gap"] == pytest.approx(gap, rel=1e-14)
    assert abs(rep["gap"] - rounded) <= 0.5 * d
    assert rep["composite"] == pytest.approx(32 * gap, rel=1e-14)
    assert all(v > 0 for v in rep.values())
