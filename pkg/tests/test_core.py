import csv
import io
import json
import math

import numpy as np
import pytest

from stepsize_lab.core import (
    Family, ParamError, ProblemParams, Schedule, Trace, fmt_float, format_csv, format_json, log_grid,
    validate_params,
)


@pytest.mark.parametrize("bad, msg", [
    (ProblemParams(0.0, 1.0), "mu must be positive"),
    (ProblemParams(2.0, 1.0), "mu <= L"),
    (ProblemParams(1.0, 1.0, -1.0), "N must be nonnegative"),
    (ProblemParams(1.0, 1.0, 1.0, -1.0), "Y0 must be nonnegative"),
    (ProblemParams(1.0, math.inf), "finite"),
])
def test_validate_rejects(bad, msg):
    with pytest.raises(ParamError, match=msg):
        validate_params(bad)


def test_omega_regimes():
    assert ProblemParams(1.0, 2.0, 8.0, 10.0).omega == 1.0
    assert ProblemParams(1e-3, 1.0, 1.0, 1.0).omega == pytest.approx(1000.0)
    assert ProblemParams(1.0, 1.0, 0.0, 0.0).omega == 1.0


def test_candidate_schedule_values():
    p = ProblemParams(1.0, 2.0, 8.0, 10.0)
    etas = Schedule.approx_candidate().etas(p, 3)
    np.testing.assert_allclose(etas, 2.0 / (np.arange(4) + 8.0))


def test_power_law_default_offset_hits_cap():
    p = ProblemParams(0.1, 3.0)
    for q in (0.25, 0.5, 1.0):
        assert Schedule.power_law(q).etas(p, 0)[0] == pytest.approx(1.0 / 6.0)


def test_power_law_rejects_large_first_step():
    with pytest.raises(ValueError):
        Schedule.power_law(1.0, K=1.0).etas(ProblemParams(0.1, 3.0), 5)
    with pytest.raises(ValueError):
        Schedule.power_law(1.5)


def test_gower_switches_after_4L_over_mu():
    p = ProblemParams(1.0, 2.0)
    etas = Schedule.gower().etas(p, 12)
    assert np.all(etas[:9] == 0.25)
    assert etas[9] == pytest.approx(19.0 / 100.0)


def test_custom_and_family():
    s = Schedule.custom(lambda t: 0.01 + 0 * t, "flat")
    assert s.family is Family.CUSTOM
    assert s.eta(ProblemParams(1.0, 1.0), 7) == 0.01
    with pytest.raises(ValueError, match="non-positive"):
        Schedule.custom(lambda t: -t).etas(ProblemParams(1.0, 1.0), 3)


def test_trace_invariants():
    with pytest.raises(ValueError):
        Trace([0, 0], [1.0, 1.0])
    with pytest.raises(ValueError):
        Trace([0, 1], [1.0, -1.0])
    tr = Trace([0, 5, 9], [3.0, 2.0, 1.0], label="x")
    assert tr.at(5) == 2.0
    with pytest.raises(KeyError):
        tr.at(4)
    assert list(tr.subsample([0, 9]).value) == [3.0, 1.0]


def test_csv_round_trip_precision():
    x = 0.1 + 0.2
    text = format_csv(["t", "v", "se"], [[1, x, None]])
    assert text.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[1] == ["1", fmt_float(x), ""]
    assert float(rows[1][1]) == x


def test_json_matches_csv():
    doc = json.loads(format_json(["t", "v"], [[1, 2.5], [2, float("nan")]]))
    assert doc == [{"t": 1, "v": 2.5}, {"t": 2, "v": None}]


def test_log_grid_shape():
    g = log_grid(10**5, 200)
    assert g[0] == 0 and g[-1] == 10**5
    assert np.all(np.diff(g) > 0)
    assert len(g) <= 5 * 200 + 2
    assert list(log_grid(0)) == [0]
