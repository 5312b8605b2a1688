import numpy as np
import pytest

from stepsize_lab import _fallback, kernels

BACKENDS = kernels.backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")


def test_backend_reported():
    assert kernels.BACKEND in BACKENDS


@needs_both
@pytest.mark.parametrize("args", [(1.0, 2.0, 8.0, 10.0, 500), (1e-3, 1.0, 1.0, 1.0, 20000), (0.5, 1.0, 0.0, 3.0, 50)])
def test_optimal_plan_agrees(args):
    zc, ec = BACKENDS["compiled"].optimal_plan(*args)
    zp, ep = _fallback.optimal_plan(*args)
    np.testing.assert_allclose(zc, zp, rtol=1e-12, atol=0)
    np.testing.assert_allclose(ec, ep, rtol=1e-12, atol=0)


@needs_both
def test_affine_and_rational_agree():
    etas = np.random.default_rng(0).uniform(0, 0.4, 3000)
    a = BACKENDS["compiled"].affine_recurrence(etas, 0.5, 0.1, 2.0, 7.0)
    b = _fallback.affine_recurrence(etas, 0.5, 0.1, 2.0, 7.0)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    a = BACKENDS["compiled"].rational_decay(2e-6, 0.01, 0.3, 5.0, 5000)
    b = _fallback.rational_decay(2e-6, 0.01, 0.3, 5.0, 5000)
    np.testing.assert_allclose(a, b, rtol=1e-12)


@needs_both
def test_quadratic_block_agrees():
    rng = np.random.default_rng(1)
    etas, scales, xi = rng.uniform(0, 1, 200), rng.uniform(0, 1, 200), rng.normal(size=(200, 6))
    w1, w2 = np.ones(6), np.ones(6)
    BACKENDS["compiled"].quadratic_block(w1, etas, scales, xi)
    _fallback.quadratic_block(w2, etas, scales, xi)
    np.testing.assert_allclose(w1, w2, rtol=1e-12)


@needs_both
def test_logreg_block_agrees():
    rng = np.random.default_rng(2)
    n, d = 30, 8
    dense = np.where(rng.random((n, d)) < 0.4, rng.normal(size=(n, d)), 0.0)
    indptr = np.concatenate(([0], np.cumsum((dense != 0).sum(axis=1)))).astype(np.int64)
    indices = np.nonzero(dense)[1].astype(np.int32)
    data = dense[dense != 0]
    labels = np.where(rng.random(n) < 0.5, -1.0, 1.0)
    rows = rng.integers(0, n, 400, dtype=np.int64)
    etas = 1.0 / (np.arange(400) + 5.0)
    w1, w2 = np.zeros(d), np.zeros(d)
    BACKENDS["compiled"].logreg_block(w1, indptr, indices, data, labels, 0.05, rows, etas)
    _fallback.logreg_block(w2, indptr, indices, data, labels, 0.05, rows, etas)
    np.testing.assert_allclose(w1, w2, rtol=1e-12, atol=1e-15)


def test_pure_fallback_forced(monkeypatch):
    import importlib

    monkeypatch.setenv("STEPSIZE_LAB_PURE", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("STEPSIZE_LAB_PURE")
        importlib.reload(kernels)
