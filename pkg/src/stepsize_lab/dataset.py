"""LIBSVM ingestion and the l2-regularized logistic-regression oracle."""

from __future__ import annotations

import gzip
import io
import logging
import math
import os
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

import numpy as np
from scipy import sparse
from scipy.special import expit

from . import kernels
from .core import ProblemParams
from .engine import CHUNK, GradientOracle

logger = logging.getLogger(__name__)


class LibsvmError(ValueError):
    """Malformed LIBSVM input; the message carries the 1-based line number."""


@dataclass(frozen=True)
class Dataset:
    """Binary-labelled rows in CSR layout with 0-based feature indices."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray
    labels: np.ndarray
    d: int
    label_map: dict[float, int] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "indptr", np.ascontiguousarray(self.indptr, dtype=np.int64))
        object.__setattr__(self, "indices", np.ascontiguousarray(self.indices, dtype=np.int32))
        object.__setattr__(self, "data", np.ascontiguousarray(self.data, dtype=np.float64))
        object.__setattr__(self, "labels", np.ascontiguousarray(self.labels, dtype=np.float64))
        if self.indptr.size != self.labels.size + 1:
            raise ValueError("indptr must have n + 1 entries")
        if self.indices.size and (self.indices.min() < 0 or self.indices.max() >= self.d):
            raise ValueError("feature index out of range")
        if not np.all(np.abs(self.labels) == 1.0):
            raise ValueError("labels must be -1 or +1")

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def matrix(self) -> sparse.csr_matrix:
        return sparse.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.d))

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[i], self.indptr[i + 1]
        return self.indices[lo:hi], self.data[lo:hi]

    def row_norms_sq(self) -> np.ndarray:
        return np.asarray(self.matrix.multiply(self.matrix).sum(axis=1)).ravel()


def _normalize_labels(raw: list[float]) -> tuple[np.ndarray, dict[float, int]]:
    distinct = sorted(set(raw))
    if set(distinct) <= {-1.0, 1.0}:
        mapping = {v: int(v) for v in distinct}
    elif set(distinct) <= {0.0, 1.0}:
        mapping = {0.0: -1, 1.0: 1}
    elif len(distinct) == 2:
        # any other two-class coding: smaller value is the negative class
        mapping = {distinct[0]: -1, distinct[1]: 1}
    else:
        shown = ", ".join(f"{v:g}" for v in distinct[:5])
        raise LibsvmError(f"non-binary labels: found {len(distinct)} classes ({shown}...)")
    return np.array([mapping[v] for v in raw], dtype=np.float64), mapping


def _lines(source: BinaryIO | bytes | str | Iterable[bytes]) -> Iterable[bytes | str]:
    if isinstance(source, (bytes, str)):
        return source.splitlines()
    return source


def parse_libsvm(source: BinaryIO | bytes | str | Iterable[bytes], n_features: int | None = None) -> Dataset:
    """Parse ``label idx:val ...`` lines; ``#`` starts a comment."""
    labels: list[float] = []
    indptr = [0]
    indices: list[int] = []
    values: list[float] = []
    for lineno, line in enumerate(_lines(source), start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        line = line.split("#", 1)[0]
        tokens = line.split()
        if not tokens:
            continue
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmError(f"line {lineno}: bad label {tokens[0]!r}") from None
        if not math.isfinite(label):
            raise LibsvmError(f"line {lineno}: non-finite label")
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            try:
                if not sep:
                    raise ValueError
                idx, val = int(idx_s), float(val_s)
            except ValueError:
                raise LibsvmError(f"line {lineno}: malformed feature token {tok!r}") from None
            if idx < 1:
                raise LibsvmError(f"line {lineno}: feature index must be >= 1, got {idx}")
            if idx <= prev:
                raise LibsvmError(f"line {lineno}: feature indices must be strictly increasing ({prev} then {idx})")
            if not math.isfinite(val):
                raise LibsvmError(f"line {lineno}: non-finite value in {tok!r}")
            prev = idx
            indices.append(idx - 1)
            values.append(val)
        labels.append(label)
        indptr.append(len(indices))
    y, mapping = _normalize_labels(labels)
    d = max(indices, default=-1) + 1
    if n_features is not None:
        if n_features < d:
            raise LibsvmError(f"n_features={n_features} smaller than max index {d}")
        d = n_features
    return Dataset(np.array(indptr), np.array(indices, dtype=np.int32), np.array(values), y, d, mapping)


def load_libsvm(path: str | os.PathLike, n_features: int | None = None) -> Dataset:
    """Read a LIBSVM file; names ending in ``.gz`` are decompressed on the fly."""
    opener = gzip.open if os.fspath(path).endswith(".gz") else open
    with opener(path, "rb") as fh:
        return parse_libsvm(fh, n_features)


def _fmt_value(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def serialize_libsvm(ds: Dataset) -> str:
    """Canonical text: ``+1``/``-1`` labels, single spaces, shortest round-trip values."""
    out = io.StringIO()
    for i in range(ds.n):
        idx, vals = ds.row(i)
        parts = ["+1" if ds.labels[i] > 0 else "-1"]
        parts += [f"{j + 1}:{_fmt_value(v)}" for j, v in zip(idx, vals)]
        out.write(" ".join(parts) + "\n")
    return out.getvalue()


def scale_maxabs(ds: Dataset) -> Dataset:
    """Divide each feature by its largest magnitude (all-zero columns untouched)."""
    scale = np.zeros(ds.d)
    np.maximum.at(scale, ds.indices, np.abs(ds.data))
    scale[scale == 0] = 1.0
    return Dataset(ds.indptr, ds.indices, ds.data / scale[ds.indices], ds.labels, ds.d, ds.label_map)


@dataclass
class LogRegProblem:
    """``F(w) = mean_i log(1 + exp(-y_i x_i.w)) + lam/2 ||w||^2``."""

    data: Dataset
    lam: float | None = None
    w_star: np.ndarray | None = None
    f_star: float | None = None

    def __post_init__(self) -> None:
        if self.data.n == 0:
            raise ValueError("dataset is empty")
        if self.lam is None:
            self.lam = 1.0 / self.data.n
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        self._X = self.data.matrix
        self.L = estimate_smoothness(self)

    @property
    def mu(self) -> float:
        return self.lam

    def margins(self, w: np.ndarray) -> np.ndarray:
        return self.data.labels * (self._X @ w)

    def objective(self, w: np.ndarray) -> float:
        return float(np.mean(np.logaddexp(0.0, -self.margins(w)))) + 0.5 * self.lam * float(np.dot(w, w))

    def component_objective(self, w: np.ndarray, i: int) -> float:
        idx, vals = self.data.row(i)
        m = self.data.labels[i] * float(np.dot(vals, w[idx]))
        return float(np.logaddexp(0.0, -m)) + 0.5 * self.lam * float(np.dot(w, w))

    def full_gradient(self, w: np.ndarray) -> np.ndarray:
        coef = -self.data.labels * expit(-self.margins(w))
        return (self._X.T @ coef) / self.data.n + self.lam * w

    def component_gradient(self, w: np.ndarray, i: int) -> np.ndarray:
        return logreg_gradient(self, w, i)


def logreg_gradient(p: LogRegProblem, w: np.ndarray, i: int) -> np.ndarray:
    """``-y_i sigma(-y_i x_i.w) x_i + lam w`` as a dense vector."""
    if not 0 <= i < p.data.n:
        raise IndexError(f"row {i} out of range")
    idx, vals = p.data.row(i)
    y = p.data.labels[i]
    sig = float(expit(-y * float(np.dot(vals, w[idx]))))
    g = p.lam * np.asarray(w, dtype=np.float64)
    g[idx] -= y * sig * vals
    return g


def estimate_smoothness(p: LogRegProblem) -> float:
    """``max_i ||x_i||^2 / 4 + lam``; the logistic curvature never exceeds 1/4."""
    norms = p.data.row_norms_sq()
    return float(norms.max(initial=0.0)) / 4.0 + p.lam


@dataclass(frozen=True)
class SolveResult:
    w_star: np.ndarray
    f_star: float
    grad_norm_sq: float
    iterations: int
    converged: bool


def solve_reference(p: LogRegProblem, tol: float = 1e-16, max_iter: int = 1_000_000) -> SolveResult:
    """Full-gradient descent with step ``1/L`` until ``||grad F||^2 <= tol``.

    On hitting ``max_iter`` the best iterate seen is returned with
    ``converged=False``. The result is stored on ``p``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    w = np.zeros(p.data.d)
    step = 1.0 / p.L
    best_w, best_g = w.copy(), math.inf
    converged = False
    it = 0
    for it in range(max_iter + 1):
        g = p.full_gradient(w)
        gn = float(np.dot(g, g))
        if gn < best_g:
            best_w, best_g = w.copy(), gn
        if gn <= tol:
            converged = True
            break
        if it < max_iter:
            w = w - step * g
    if not converged:
        logger.warning("reference solve not converged: ||grad||^2=%.3g after %d iterations", best_g, it)
    p.w_star, p.f_star = best_w, p.objective(best_w)
    return SolveResult(best_w, p.f_star, best_g, it, converged)


def noise_estimate(p: LogRegProblem, w_star: np.ndarray | None = None) -> float:
    """``(2/n) sum_i ||grad f_i(w*)||^2``."""
    w = p.w_star if w_star is None else w_star
    if w is None:
        raise ValueError("reference optimum unknown; call solve_reference first")
    c = -p.data.labels * expit(-p.margins(w))
    norms = p.data.row_norms_sq()
    xw = p._X @ w
    per_row = c**2 * norms + 2.0 * p.lam * c * xw + p.lam**2 * float(np.dot(w, w))
    return 2.0 * float(np.mean(np.maximum(per_row, 0.0)))


class LogRegOracle(GradientOracle):
    """Uniform row sampling over the finite sum."""

    def __init__(self, p: LogRegProblem, w0: np.ndarray | None = None):
        if p.w_star is None:
            raise ValueError("solve the reference problem first")
        self.problem = p
        self.dimension = p.data.d
        self.reference_optimum = p.w_star
        w0 = np.zeros(p.data.d) if w0 is None else np.asarray(w0, dtype=np.float64)
        y0 = float(np.dot(w0 - p.w_star, w0 - p.w_star))
        self.params = ProblemParams(p.mu, p.L, noise_estimate(p), y0)

    def stochastic_gradient(self, w, rng):
        return logreg_gradient(self.problem, w, int(rng.integers(self.problem.data.n)))

    def full_gradient(self, w):
        return self.problem.full_gradient(w)

    def objective(self, w):
        return self.problem.objective(w)

    @property
    def optimal_value(self) -> float:
        return self.problem.f_star

    def advance(self, w, etas, rng):
        ds = self.problem.data
        for start in range(0, len(etas), CHUNK):
            block = np.ascontiguousarray(etas[start:start + CHUNK])
            rows = rng.integers(0, ds.n, size=block.size, dtype=np.int64)
            kernels.logreg_block(w, ds.indptr, ds.indices, ds.data, ds.labels, self.problem.lam, rows, block)
