import csv
import io
import json
import math

import numpy as np
import pytest

from stepsize_lab import recurrence as rec
from stepsize_lab.cli import BOUNDS_COLUMNS, main
from stepsize_lab.core import ProblemParams


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows_of(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_bounds_csv_sandwich_upper(capsys):
    code, out, err = run(capsys, "bounds", "--mu", "1", "--L", "2", "--N", "8", "--Y0", "10", "--t-max", "10000")
    assert code == 0 and "mu/(2L) > 0.05" in err
    rows = rows_of(out)
    assert list(rows[0].keys()) == BOUNDS_COLUMNS
    W = rec.compute_W(ProblemParams(1, 2, 8, 10))
    for r in rows:
        has_tight = r["Z_tight_hi"] != ""
        assert has_tight == (int(r["t"]) >= W)
        if has_tight:
            assert float(r["Z_iter"]) <= float(r["Z_tight_hi"]) * (1 + 1e-12)


def test_bounds_empty_grid(capsys):
    code, out, _ = run(capsys, "bounds", "--t-grid", "", "--t-max", "10")
    assert code == 0 and out == ",".join(BOUNDS_COLUMNS) + "\r\n"


def test_bounds_json_equals_csv(capsys):
    args = ["bounds", "--mu", "1", "--L", "2", "--N", "8", "--Y0", "10", "--t-max", "300"]
    _, out_csv, _ = run(capsys, *args)
    _, out_json, _ = run(capsys, *args, "--format", "json")
    doc = json.loads(out_json)
    for rc, rj in zip(rows_of(out_csv), doc["rows"]):
        for k in BOUNDS_COLUMNS:
            assert (rc[k] == "" and rj[k] is None) or float(rc[k]) == rj[k]


def test_invalid_params_exit_1(capsys):
    code, _, err = run(capsys, "bounds", "--mu", "3", "--L", "1")
    assert code == 1 and "mu <= L" in err


def test_missing_dataset_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, "logreg", "--dataset", str(tmp_path / "nope.libsvm"))
    assert code == 2


def test_bad_dataset_exit_1(capsys, tmp_path):
    f = tmp_path / "bad.libsvm"
    f.write_text("+1 1:x\n")
    code, _, err = run(capsys, "logreg", "--dataset", str(f))
    assert code == 1 and "line 1" in err


def test_unwritable_output_exit_2(capsys, tmp_path):
    code, _, _ = run(capsys, "compare", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 2


def test_tightness_single_run_has_empty_stderr(capsys):
    code, out, err = run(capsys, "tightness", "--runs", "1", "--t-max", "2000", "--n", "100", "--d", "3")
    assert code == 0
    assert all(r["stderr"] == "" for r in rows_of(out))
    assert "sandwich_fraction" in err


def test_tightness_rejects_invalid_model(capsys):
    code, _, err = run(capsys, "tightness", "--n", "10", "--t-max", "10")
    assert code == 1 and "invalid model" in err


def test_logreg_smoke(capsys, data_dir):
    code, out, err = run(capsys, "logreg", "--dataset", str(data_dir / "synthetic20.libsvm"),
                         "--t-max", "20000", "--runs", "5", "--tol", "1e-14")
    assert code == 0
    assert "N_over_muLY0" in err and "reference_grad_norm_sq" in err
    ys = [float(r["Y_sim"]) for r in rows_of(out)]
    assert ys[-1] < ys[0] / 10


def test_schedule_report(capsys):
    code, out, err = run(capsys, "schedule", "--t-max", "100000", "--q", "1,0.5", "--k", "2")
    assert code == 0
    assert "divergence_integral_bound: 1.0" in err and "divergence_verdict: converges" in err
    crossing = float(err.split("crossing: ")[1].split()[0])
    assert 1 <= crossing <= 1e5
    last = rows_of(out)[-1]
    assert float(last["Z_q1"]) <= float(last["Z_q0.5"])


def test_compare_table(capsys):
    code, out, _ = run(capsys, "compare", "--d", "100")
    rows = {r["quantity"]: float(r["value"]) for r in rows_of(out)}
    assert abs(rows["gap"] - 77530) < 50
    code, out, _ = run(capsys, "compare", "--d", "1", "--format", "json")
    assert json.loads(out)["rows"][2]["value"] == pytest.approx(775.3, abs=0.5)
