import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrig.expsum import (Box, ExpSum, certified_sup, dumps, evaluate, evaluate_prefixes,
                           gradient_bound, lemma21_bound, lemma21_check, loads,
                           running_partial_max, witness_check, witness_rectangle)


def dense_max(P, T, n=20001):
    t = np.linspace(-T, T, n)[:, None]
    return float(np.abs(evaluate(P, t)).max())


def test_evaluate_single_term():
    P = ExpSum([2.0], [[3.0]])
    assert np.allclose(evaluate(P, [[0.5]]), 2 * np.exp(1.5j))


def test_evaluate_prefixes_last_column_is_full_sum():
    rng = np.random.default_rng(0)
    P = ExpSum(rng.standard_normal(7), rng.standard_normal((7, 2)))
    t = rng.standard_normal((5, 2))
    pre = evaluate_prefixes(P, t)
    assert pre.shape == (5, 7)
    assert np.allclose(pre[:, -1], evaluate(P, t))


def test_shape_errors():
    with pytest.raises(ValueError):
        ExpSum([1, 2], [[1.0]])
    with pytest.raises(ValueError):
        certified_sup(ExpSum([1.0], [[1.0, 2.0]]), Box(1.0, 1))
    with pytest.raises(ValueError):
        Box(-1.0, 1)


def test_zero_polynomial():
    b = certified_sup(ExpSum([0, 0], [[1.0], [2.0]]), Box(math.pi, 1))
    assert b.lower == b.upper == 0.0


def test_constant_modulus_is_exact():
    # one exponential has constant modulus |a|
    b = certified_sup(ExpSum([3 - 4j], [[7.3]]), Box(2.0, 1), tol=1e-10)
    assert b.contains(5.0, 1e-12) and b.width <= 1e-9


def test_fejer_like_sum_hits_n_at_origin():
    n = 50
    P = ExpSum(np.ones(n), np.arange(1, n + 1))
    b = certified_sup(P, Box(math.pi, 1), tol=1e-9)
    assert b.contains(float(n), 1e-9)


def test_frozen_value_two_terms():
    # |1 + 0.5 e^{i t}| peaks at 1.5 when t = 0
    b = certified_sup(ExpSum([1.0, 0.5], [[0.0], [1.0]]), Box(1.0, 1), tol=1e-10)
    assert abs(b.lower - 1.5) < 1e-9


def test_running_partial_max_sees_cancellation():
    # the first partial sum (=1) beats the full sum (=0) at t = 0
    b = running_partial_max(ExpSum([1.0, -1.0], [[1.0], [1.0]]), 2, Box(1.0, 1), tol=1e-10)
    assert abs(b.lower - 1.0) < 1e-9 and b.n0 == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 10**6), st.booleans())
def test_bracket_contains_grid_max(n, seed, integer):
    rng = np.random.default_rng(seed)
    lam = rng.integers(-20, 21, n).astype(float) if integer else rng.uniform(-15, 15, n)
    P = ExpSum(rng.standard_normal(n) + 1j * rng.standard_normal(n), lam[:, None])
    b = certified_sup(P, Box(math.pi, 1), tol=1e-6)
    g = dense_max(P, math.pi)
    assert g <= b.upper + 1e-12
    assert b.width <= 1e-6 + 1e-12
    assert abs(evaluate(P, b.argmax[None, :])[0]) >= b.lower - 1e-9


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 8), st.integers(0, 10**6))
def test_prefix_bracket_contains_grid_max(n, seed):
    rng = np.random.default_rng(seed)
    P = ExpSum(rng.standard_normal(n), rng.uniform(-6, 6, (n, 1)))
    b = running_partial_max(P, n, Box(1.0, 1), tol=1e-7)
    t = np.linspace(-1, 1, 4001)[:, None]
    g = float(np.abs(evaluate_prefixes(P, t)).max())
    assert g <= b.upper + 1e-12 and b.lower <= g + gradient_bound(P).max() * 1e-3


def test_budget_exceeded_keeps_valid_bracket():
    rng = np.random.default_rng(3)
    P = ExpSum(rng.standard_normal(30), rng.uniform(-40, 40, (30, 2)))
    b = certified_sup(P, Box(math.pi, 2), tol=1e-12, max_evals=5000)
    assert b.status == "budget_exceeded"
    t = rng.uniform(-math.pi, math.pi, (20000, 2))
    assert np.abs(evaluate(P, t)).max() <= b.upper


def test_two_dimensional_separable_product():
    # (1 + e^{i x})(1 + e^{i y}) has sup 4 at the origin
    P = ExpSum([1, 1, 1, 1], [[0, 0], [1, 0], [0, 1], [1, 1]])
    b = certified_sup(P, Box(1.0, 2), tol=1e-9)
    assert b.contains(4.0, 1e-9)


def test_lemma21_bound_frozen():
    P = ExpSum([1.0, 1.0], [[1.0], [-2.0]])
    box = Box(1.0, 1)
    M = running_partial_max(P, 2, box, 1e-9).upper
    assert lemma21_bound(P, 2, box) == pytest.approx(3 * 2 * 2 * M)
    sampled, bound = lemma21_check(P, 2, box, n_points=2000)
    assert sampled <= bound


def test_lemma21_monotone_needs_monotone_freqs():
    with pytest.raises(ValueError):
        lemma21_bound(ExpSum([1, 1], [[2.0], [1.0]]), 2, Box(1.0, 1), monotone=True)


def test_witness_rectangle_half_width():
    P = ExpSum([1.0], [[1.0]])
    r = witness_rectangle(P, 1, Box(math.pi, 1))
    assert r.half_widths[0] == pytest.approx(1 / 6)
    assert witness_check(P, 1, r, rng=0) >= 0.5


def test_witness_zero_frequency_axis_spans_box():
    P = ExpSum([1.0, 2.0], [[0.0, 1.0], [0.0, 2.0]])
    r = witness_rectangle(P, 2, Box(1.0, 2))
    assert math.isinf(r.half_widths[0])
    assert r.lo[0] == -1.0 and r.hi[0] == 1.0
    assert r.area >= r.area_bound


def test_witness_half_max_on_random_sums():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(1, 10))
        P = ExpSum(rng.standard_normal(n) + 1j * rng.standard_normal(n), rng.uniform(-8, 8, (n, 1)))
        r = witness_rectangle(P, n, Box(math.pi, 1))
        assert witness_check(P, n, r, rng=rng) >= 0.5 - 1e-3
        assert r.area >= r.area_bound * (1 - 1e-12)


def test_dumps_loads_roundtrip():
    P = ExpSum([1 + 2j, -0.5], [[0.25, 1.0], [3.0, -2.0]])
    assert loads(dumps(P)) == P
    with pytest.raises(ValueError):
        loads("2\n1 2 3\n")
