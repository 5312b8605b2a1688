"""``stepsize-lab`` command line: bounds, tightness, logreg, schedule, compare.

Tables go to ``--out`` (stdout by default) as CSV or JSON; summaries go to
stderr. Exit status is 0 on success, 1 on invalid input or analysis
failure, 2 on I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import warnings
from typing import Any, Sequence

import numpy as np

from . import approximation, bound_compare, dataset, recurrence, schedule_analysis, tightness
from .core import ParamError, ProblemParams, Schedule, format_csv, format_json, log_grid, validate_params
from .engine import DEFAULT_SEED, RunConfig, run_sgd

logger = logging.getLogger("stepsize_lab")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2

BOUNDS_COLUMNS = ["t", "Z_iter", "Z_tight_lo", "Z_tight_hi", "Z_weak_lo", "Z_weak_hi",
                  "Z_prime", "eta_opt", "eta_prime"]
TIGHTNESS_COLUMNS = ["t", "Y_sim", "stderr", "Y_exact", "lower", "upper"]
LOGREG_COLUMNS = ["t", "Y_sim", "stderr", "Z_prime", "eta_prime"]


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _grid(spec: str, t_max: int, per_decade: int, start: int = 0) -> np.ndarray:
    if spec == "log":
        g = log_grid(t_max, per_decade)
    elif spec == "linear":
        g = np.arange(0, t_max + 1, dtype=np.int64)
    else:
        try:
            g = np.array(sorted({int(x) for x in spec.split(",") if x.strip()}), dtype=np.int64)
        except ValueError:
            raise CliError(f"--t-grid must be 'log', 'linear' or comma-separated integers, got {spec!r}") from None
        if g.size and (g[0] < 0 or g[-1] > t_max):
            raise CliError(f"--t-grid entries must lie in [0, {t_max}]")
    return g[g >= start]


def _params(args: argparse.Namespace) -> ProblemParams:
    return validate_params(ProblemParams(args.mu, args.L, args.N, args.Y0))


def _emit(args: argparse.Namespace, header: Sequence[str], rows: list[list[Any]], summary: dict[str, Any]) -> None:
    if args.format == "json":
        text = format_json(header, rows, {"summary": summary})
    else:
        text = format_csv(header, rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        try:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO) from exc
    for key, value in summary.items():
        print(f"{key}: {value}", file=sys.stderr)


def _masked(values: np.ndarray, mask: np.ndarray) -> list[float | None]:
    return [float(v) if m else None for v, m in zip(values, mask)]


def cmd_bounds(args: argparse.Namespace) -> dict[str, Any]:
    p = _params(args)
    if p.mu / (2.0 * p.L) > 0.05:
        print("warning: mu/(2L) > 0.05, the weak bounds and ratio certificate assume mu << L", file=sys.stderr)
    t = _grid(args.t_grid, args.t_max, args.per_decade)
    plan = recurrence.iterate_plan(p, args.t_max)
    n = t.size
    nan = np.full(n, np.nan)
    tight_lo, tight_hi, weak_lo, weak_hi, zp = nan.copy(), nan.copy(), nan.copy(), nan.copy(), nan.copy()
    summary: dict[str, Any] = {"W": plan.W}
    if p.N > 0 and plan.W is not None and plan.W <= args.t_max:
        m = t >= plan.W
        if m.any():
            tight_lo[m], tight_hi[m] = recurrence.z_bounds_tight(p, plan.W, plan.z.value[plan.W], t[m])
    if p.N > 0 and p.Y0 > 0:
        m = (t >= recurrence.compute_W(p)) & (t > recurrence.weak_validity_start(p))
        if m.any():
            weak_lo[m], weak_hi[m] = recurrence.z_bounds_weak(p, t[m])
        tp = approximation.t_prime(p)
        summary["T_prime"] = tp
        m = t >= math.ceil(tp)
        if m.any():
            zp[m] = approximation.z_prime_bound(p, t[m])
    z = plan.z.value[t]
    eta = plan.eta.value[t]
    etp = approximation.eta_prime(p, t) if n else nan
    rows = [[int(t[i]), z[i], tight_lo[i], tight_hi[i], weak_lo[i], weak_hi[i], zp[i], eta[i], etp[i]]
            for i in range(n)]
    has = ~np.isnan(tight_lo)
    ok = (tight_lo[has] <= z[has] * (1 + 1e-12)) & (z[has] <= tight_hi[has] * (1 + 1e-12))
    summary["tight_sandwich_fraction"] = float(ok.mean()) if ok.size else math.nan
    return {"header": BOUNDS_COLUMNS, "rows": rows, "summary": summary}


def cmd_tightness(args: argparse.Namespace) -> dict[str, Any]:
    try:
        tm = tightness.TightnessModel.reference_config(args.n, args.d, args.seed)
    except ParamError as exc:
        raise CliError(f"invalid model: {exc}") from None
    if args.family == "prime":
        sched: Any = Schedule.approx_candidate()
    elif args.family == "oracle":
        sched = tightness.oracle_etas(tm, args.t_max)
    elif args.family == "power":
        sched = Schedule.power_law(args.q[0])
    elif args.family == "gower":
        sched = Schedule.gower()
    else:
        raise CliError(f"family {args.family!r} not available for the tightness model")
    grid = _grid(args.t_grid, args.t_max, args.per_decade)
    sim = tightness.simulate_sgd_runs(tm, sched, args.t_max, args.runs, args.seed, record_grid=grid)
    exact = tightness.exact_y_trace(tm, args.t_max).value[grid]
    lower = tightness.tight_lower(tm, grid)
    start = tightness.tight_upper_start(tm)
    valid = grid >= start
    upper = np.full(grid.size, np.nan)
    if valid.any():
        upper[valid] = tightness.tight_upper(tm, grid[valid])
    se = sim.stderr if sim.stderr is not None else np.zeros(grid.size)
    rows = [[int(grid[i]), sim.value[i], None if sim.stderr is None else sim.stderr[i], exact[i], lower[i],
             None if not valid[i] else upper[i]] for i in range(grid.size)]
    inside = (sim.value + 3 * se >= lower) & (sim.value - 3 * se <= upper)
    frac = float(inside[valid].mean()) if valid.any() else math.nan
    N, Y0, omega, W_rec = tightness.derived_constants(tm)
    summary = {"mu": tm.mu, "L": tm.L, "N": N, "Y0": Y0, "upper_valid_from": start,
               "sandwich_fraction": frac, "diverged_runs": len(sim.meta["diverged_runs"])}
    return {"header": TIGHTNESS_COLUMNS, "rows": rows, "summary": summary}


def cmd_logreg(args: argparse.Namespace) -> dict[str, Any]:
    if not args.dataset:
        raise CliError("--dataset is required")
    try:
        data = dataset.load_libsvm(args.dataset)
    except OSError as exc:
        raise CliError(f"cannot read {args.dataset}: {exc.strerror or exc}", EXIT_IO) from exc
    except dataset.LibsvmError as exc:
        raise CliError(f"{args.dataset}: {exc}") from None
    if args.scale_features:
        data = dataset.scale_maxabs(data)
    prob = dataset.LogRegProblem(data)
    sol = dataset.solve_reference(prob, args.tol, args.max_iter)
    oracle = dataset.LogRegOracle(prob)
    p = oracle.params
    grid = _grid(args.t_grid, args.t_max, args.per_decade)
    cfg = RunConfig(t_max=args.t_max, runs=args.runs, seed=args.seed,
                    schedule=Schedule.approx_candidate(), record_grid=grid)
    sim = run_sgd(oracle, np.zeros(data.d), cfg)
    zp = np.full(grid.size, np.nan)
    tp = approximation.t_prime(p) if p.N > 0 else math.inf
    valid = grid >= math.ceil(tp) if math.isfinite(tp) else np.zeros(grid.size, bool)
    if valid.any():
        zp[valid] = approximation.z_prime_bound(p, grid[valid])
    etp = approximation.eta_prime(p, grid)
    rows = [[int(grid[i]), sim.value[i], None if sim.stderr is None else sim.stderr[i], zp[i], etp[i]]
            for i in range(grid.size)]
    ratio = p.N / (p.mu * p.L * p.Y0) if p.Y0 > 0 else math.inf
    summary = {"n": data.n, "d": data.d, "mu": p.mu, "L": p.L, "N_hat": p.N, "Y0": p.Y0,
               "N_over_muLY0": ratio, "small_noise_regime": ratio <= 1.0,
               "reference_grad_norm_sq": sol.grad_norm_sq, "reference_converged": sol.converged,
               "T_prime": tp}
    return {"header": LOGREG_COLUMNS, "rows": rows, "summary": summary}


def cmd_schedule(args: argparse.Namespace) -> dict[str, Any]:
    p = _params(args)
    if args.family == "power":
        sched = Schedule.power_law(args.q[0])
    elif args.family == "prime":
        sched = Schedule.approx_candidate()
    else:
        raise CliError(f"family {args.family!r} has no continuous form; use power or prime")
    cs = schedule_analysis.ContinuousSchedule.from_schedule(sched, p)
    traces = schedule_analysis.family_compare(p, args.q, args.t_max)
    grid = _grid(args.t_grid, args.t_max, args.per_decade, start=1)
    rows = []
    for t in grid:
        try:
            bound: float | None = schedule_analysis.convergence_rate_bound(cs, p, int(t))
        except ParamError:
            bound = None
        rows.append([int(t), cs.n(float(t)), schedule_analysis.big_m(cs, float(t)),
                     schedule_analysis.c_of_t(cs, float(t)), bound] + [traces[q].value[t] for q in args.q])
    header = ["t", "n", "M", "C", "rate_bound"] + [f"Z_q{q:g}" for q in args.q]
    crossing = schedule_analysis.find_crossing(cs, float(max(args.t_max, 2)))
    div = schedule_analysis.divergence_test(args.k, max(args.t_max, 3))
    finals = {f"Z_q{q:g}@t_max": float(traces[q].value[-1]) for q in args.q}
    summary = {"family": sched.label, "crossing": crossing, **finals,
               "divergence_k": args.k, "divergence_integral_bound": div.integral_bound,
               "divergence_partial_sum": div.partial_sum, "divergence_verdict": div.verdict}
    return {"header": header, "rows": rows, "summary": summary}


def cmd_compare(args: argparse.Namespace) -> dict[str, Any]:
    if args.d < 1:
        raise CliError("--d must be >= 1")
    rows = [[k, v] for k, v in bound_compare.comparison_report(args.d)]
    delta, theta, beta = bound_compare.beta_optimum()
    summary = {"d": args.d, "beta_min": beta, "beta_delta": delta, "beta_theta_max": theta}
    return {"header": ["quantity", "value"], "rows": rows, "summary": summary}


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("expected at least one value")
    return vals


def _int_like(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not v.is_integer():
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return int(v)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"master seed (default {DEFAULT_SEED})")
    common.add_argument("--t-max", type=_int_like, default=10_000)
    common.add_argument("--t-grid", default="log", help="'log', 'linear' or comma-separated iterations")
    common.add_argument("--per-decade", type=int, default=200, help="log-grid density")
    common.add_argument("-v", "--verbose", action="store_true")

    params = argparse.ArgumentParser(add_help=False)
    params.add_argument("--mu", type=float, default=1e-3)
    params.add_argument("--L", type=float, default=1.0)
    params.add_argument("--N", type=float, default=1.0)
    params.add_argument("--Y0", type=float, default=1.0)

    runs = argparse.ArgumentParser(add_help=False)
    runs.add_argument("--runs", type=int, default=10)

    ap = argparse.ArgumentParser(prog="stepsize-lab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bounds", parents=[common, params], help="optimal plan and its bounds")
    b.set_defaults(func=cmd_bounds)

    t = sub.add_parser("tightness", parents=[common, runs], help="Monte Carlo on the Gaussian tight example")
    t.add_argument("--n", type=_int_like, default=1000, help="mu = 1/n")
    t.add_argument("--d", type=int, default=10)
    t.add_argument("--family", choices=("prime", "oracle", "power", "gower"), default="prime")
    t.add_argument("--q", type=_float_list, default=[1.0])
    t.set_defaults(func=cmd_tightness, t_max=100_000)

    lr = sub.add_parser("logreg", parents=[common, runs], help="SGD on l2-regularized logistic regression")
    lr.add_argument("--dataset", required=True)
    lr.add_argument("--tol", type=float, default=1e-16)
    lr.add_argument("--max-iter", type=int, default=1_000_000)
    lr.add_argument("--scale-features", action="store_true", help="per-feature max-abs scaling")
    lr.set_defaults(func=cmd_logreg)

    s = sub.add_parser("schedule", parents=[common, params], help="continuous-time schedule diagnostics")
    s.add_argument("--family", choices=("power", "prime"), default="power")
    s.add_argument("--q", type=_float_list, default=[1.0, 0.5], help="power-law exponents to compare")
    s.add_argument("--k", type=float, default=2.0, help="exponent of the divergence test")
    s.set_defaults(func=cmd_schedule, per_decade=20)

    c = sub.add_parser("compare", parents=[common], help="gap to the prior lower bound")
    c.add_argument("--d", type=int, default=1)
    c.set_defaults(func=cmd_compare)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            result = args.func(args)
        _emit(args, result["header"], result["rows"], result["summary"])
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ParamError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
