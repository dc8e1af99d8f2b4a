import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrig import _certify
from aptrig.expsum import ExpSum, evaluate


def test_multi_indices_counts():
    assert _certify.multi_indices(1, 3) == [(3,)]
    assert len(_certify.multi_indices(2, 4)) == 5
    assert len(_certify.multi_indices(3, 2)) == 6
    assert _certify.multi_indices(2, 1) == [(1, 0), (0, 1)]


def _random(seed, n, s, integer):
    rng = np.random.default_rng(seed)
    lam = rng.integers(-12, 13, (n, s)).astype(float) if integer else rng.uniform(-9, 9, (n, s))
    return rng.standard_normal(n) + 1j * rng.standard_normal(n), lam


@pytest.mark.parametrize("integer", [True, False])
@pytest.mark.parametrize("s", [1, 2])
def test_first_sweep_paths_agree_with_direct(integer, s):
    a, lam = _random(5, 12, s, integer)
    model = _certify.build_model(a, lam, prefix=False)
    counts = [16] * s
    T = math.pi
    centers = _certify.grid_centers(T, counts)
    h = np.array([T / c for c in counts])
    direct = _certify.sweep(model, centers, h, T)
    data = _certify._fft_data(model, counts) if integer else _certify._separable_data(model, T, counts)
    fast = _certify.sweep(model, centers, h, T, data)
    assert direct[0] == pytest.approx(fast[0], rel=1e-12)
    assert np.allclose(direct[3], fast[3], rtol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 10), st.integers(1, 2), st.booleans())
def test_cell_upper_bounds_dominate_samples(seed, n, s, prefix):
    a, lam = _random(seed, n, s, False)
    model = _certify.build_model(a, lam, prefix=prefix)
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1, 1, (6, s))
    h = rng.uniform(0.01, 0.4, (6, s))
    data = _certify.direct_data(model, c)
    val, ub, lb = _certify.cell_bounds(model, data, h, 1.0, want_lower=True)
    u = rng.uniform(-1, 1, (6, 200, s))
    pts = c[:, None, :] + u * h[:, None, :]
    P = ExpSum(a, lam)
    for i in range(6):
        if prefix:
            E = np.exp(1j * pts[i] @ lam.T) * a
            true = np.abs(np.cumsum(E, axis=1))
        else:
            true = np.abs(evaluate(P, pts[i]))[:, None]
        assert np.all(true.max(axis=0) <= ub[i] + 1e-12)
        assert np.all(lb[i] <= true.min(axis=0) + 1e-12)


def test_run_triangle_cap_shortcut():
    # a single exponential cannot be localised; the l1 cap closes the bracket
    r = _certify.run(np.array([2j]), np.array([[5.0, 3.0]]), 1.0, 1e-9)
    assert r.status == "ok" and r.upper - r.lower <= 1e-9
