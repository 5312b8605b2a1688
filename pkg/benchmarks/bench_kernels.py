"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from stepsize_lab import kernels


def _cases(rng: np.random.Generator):
    n, d, rows = 2000, 50, 20000
    dense = np.where(rng.random((n, d)) < 0.2, rng.normal(size=(n, d)), 0.0)
    indptr = np.concatenate(([0], np.cumsum((dense != 0).sum(axis=1)))).astype(np.int64)
    indices = np.nonzero(dense)[1].astype(np.int32)
    data = dense[dense != 0]
    labels = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    sample = rng.integers(0, n, rows, dtype=np.int64)
    etas = 1.0 / (np.arange(rows) + 10.0)
    scales = rng.uniform(0, 1, 20000)
    xi = rng.normal(size=(20000, 10))
    long_etas = rng.uniform(0, 0.4, 10**6)
    return {
        "optimal_plan 1e6": lambda k: k.optimal_plan(1e-3, 1.0, 1.0, 1.0, 10**6),
        "affine_recurrence 1e6": lambda k: k.affine_recurrence(long_etas, 0.5, 0.1, 2.0, 7.0),
        "rational_decay 1e6": lambda k: k.rational_decay(2e-6, 0.01, 0.3, 5.0, 10**6),
        "quadratic_block 2e4x10": lambda k: k.quadratic_block(np.ones(10), etas, scales, xi),
        "logreg_block 2e4 rows": lambda k: k.logreg_block(np.zeros(d), indptr, indices, data, labels, 1e-3,
                                                          sample, etas),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.backends()
    cases = _cases(np.random.default_rng(0))
    names = sorted(backends)
    print(f"{'kernel':<26}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, fn in cases.items():
        best = {}
        for name in names:
            times = []
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                fn(backends[name])
                times.append(time.perf_counter() - t0)
            best[name] = min(times)
        row = f"{label:<26}" + "".join(f"{best[n] * 1e3:>10.2f}ms" for n in names)
        if len(names) > 1:
            row += f"{best['python'] / best['compiled']:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
