import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrig.convergence import (BlockSchedule, BudgetExceeded, PowerLog, WeightSequence,
                                check_kappa_properties, dyadic_blocks, kappa_blocks,
                                series_condition, thm41_maximal_constant, uniform_tail_diagnostic)
from aptrig.expsum import Box


def test_powerlog_algebra_and_summability():
    f = PowerLog(2.0, -1.0, -2.0)
    g = f * PowerLog(1.0, 0.0, 3.0)
    assert (g.c, g.a, g.b) == (2.0, -1.0, 1.0)
    assert (f ** 2).a == -2.0 and (3 * f).c == 6.0
    assert f.summable() and not g.summable() and PowerLog(1, -1.5, 5).summable()
    assert float(PowerLog(1.0, -2.0, 0.0, 1)(np.array([0.5, 2.0]))[1]) == 0.25
    assert float(PowerLog(1.0, -2.0, 0.0, 1)(0.5)) == 0.0


@pytest.mark.parametrize("a,b", [(-2.0, 0.0), (-1.0, -2.0), (-1.5, 1.0), (-1.0, -1.5)])
def test_tail_integral_matches_closed_form_or_sum(a, b):
    f = PowerLog(1.0, a, b)
    x = 50.0
    if b == 0:
        assert f.tail_integral(x) == pytest.approx(x ** (a + 1) / -(a + 1), rel=1e-8)
    elif a == -1:
        assert f.tail_integral(x) == pytest.approx(math.log(x) ** (b + 1) / -(b + 1), rel=1e-8)
    # the integral-test bound dominates a long partial sum
    n0 = 60
    partial = float(f(np.arange(n0, 10 ** 6)).sum())
    assert partial <= f.tail_sum(n0)


def test_weight_sequence_validation():
    with pytest.raises(ValueError):
        WeightSequence([1.0, 0.5, 2.0]).values(3)
    with pytest.raises(ValueError):
        WeightSequence([0.0, 1.0]).values(2)
    with pytest.raises(ValueError):
        WeightSequence([1.0, 2.0]).values(5)
    with pytest.raises(ValueError):
        WeightSequence(PowerLog(1.0, 2.0, 0.0, 1), C=1.0, gamma=1.0).values(10)
    assert WeightSequence(PowerLog(1.0, 1.0, 0.0, 1), C=1.0, gamma=1.0).values(4).tolist() == [1, 2, 3, 4]


def test_kappa_blocks_frozen():
    s = kappa_blocks(WeightSequence(np.ones(10 ** 5)), 1.0, 10 ** 5)
    assert s.kappa == (16, 2211, 100000) and s.truncated
    lin = kappa_blocks(WeightSequence(PowerLog(1.0, 1.0, 0.0, 1)), 2.0, 100)
    assert lin.kappa[:4] == (3, 6, 11, 21)
    with pytest.raises(ValueError):
        kappa_blocks(WeightSequence(np.full(5, 0.01)), 1.0, 5)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(0.0, 3.0), st.floats(0.0, 2.0), st.floats(0.5, 3.0))
def test_kappa_properties_hold_for_power_log_weights(c, a, b, p):
    # c <= 1 keeps A_n <= n^gamma with gamma = a + b, the cap under which (iii) is stated
    A = WeightSequence(PowerLog(c, a, b, 2) if b else PowerLog(c, a, 0.0, 1))
    if b:
        A = WeightSequence(lambda n, f=PowerLog(c, a, b, 2): np.maximum(f(np.maximum(n, 3)), 1e-3))
    N = 20000
    try:
        s = kappa_blocks(A, p, N)
    except ValueError:
        return
    res = check_kappa_properties(s, A, p, gamma=a + b + 1e-9)
    assert res["i"] and res["ii"] and res["iii"]


def test_property_iii_needs_the_unit_cap():
    # A = 3 exceeds the cap n^0, and (iii) then fails on the first block
    A = WeightSequence(np.full(1000, 3.0))
    s = kappa_blocks(A, 0.5, 1000)
    res = check_kappa_properties(s, A, 0.5, gamma=0.0)
    assert res["i"] and res["ii"] and res["iii"] is False
    assert check_kappa_properties(s, A, 0.5)["iii"] is None


def test_dyadic_blocks_frozen():
    assert dyadic_blocks(WeightSequence(np.arange(1.0, 17.0)), 16).blocks == [
        (1, 1), (2, 3), (4, 7), (8, 15), (16, 16)]
    s = dyadic_blocks(WeightSequence(2.0 ** np.arange(10)), 10)
    assert s.blocks == [(k, k) for k in range(1, 11)] and s.levels == tuple(range(10))
    with pytest.raises(ValueError):
        dyadic_blocks(WeightSequence(np.ones(8)), 8)
    d = BlockSchedule.dyadic(3)
    assert d.blocks == [(1, 1), (2, 3), (4, 7)]
    assert d.to_csv().splitlines()[0] == "block,first,last,level"


def test_thm41_constant_frozen():
    assert thm41_maximal_constant(2, 1, 1.0) == pytest.approx(17.2873, abs=1e-4)
    with pytest.raises(ValueError):
        thm41_maximal_constant(1, 1, 1.0)


def test_series_verdicts():
    r = series_condition("THM51", {"x2": PowerLog(1.0, -1.0, -4.1)})
    assert r.verdict == "converges" and r.partial_sum == pytest.approx(2.989, abs=1e-3)
    assert math.isfinite(r.tail_bound) and r.total_upper > r.partial_sum
    assert series_condition("THM12", {"x2": PowerLog(1.0, -1.0, -3.5)}).verdict == "diverges"
    assert series_condition("THM45", {"x2": PowerLog(1.0, -1.0, 0.0, 1)}).verdict == "diverges"
    assert series_condition("THM45", {"x2": PowerLog(1.0, -2.0, 0.0, 1)}).verdict == "converges"
    r41 = series_condition("THM41", {"alpha": PowerLog(1.0, -2.0, 0.0, 1), "A": np.ones(10 ** 5), "p": 2})
    # an array of weights says nothing past the horizon
    assert r41.verdict == "undetermined"
    r41 = series_condition("THM41", {"alpha": PowerLog(1.0, -2.0, 0.0, 1),
                                     "A": PowerLog(1.0, 0.0, 0.0, 1), "p": 2})
    assert r41.verdict == "converges"
    # level rate 1/p + (q/p)(a_alpha + 1)/a_A: zero for q = 1, negative for q = 2
    r42 = series_condition("THM42", {"alpha": PowerLog(1.0, -2.0, 0.0, 1),
                                     "A": PowerLog(1.0, 1.0, 0.0, 1), "p": 2, "q": 1})
    assert r42.verdict == "diverges" and r42.tail_bound == math.inf
    r42 = series_condition("THM42", {"alpha": PowerLog(1.0, -2.0, 0.0, 1),
                                     "A": PowerLog(1.0, 1.0, 0.0, 1), "p": 2, "q": 2})
    assert r42.verdict == "converges" and r42.tail_bound < r42.partial_sum
    assert series_condition("THM51", {"x2": lambda n: 1.0 / n ** 3}).verdict == "undetermined"


def test_series_finite_support_is_exact():
    x2 = np.array([1.0, 0.5, 0.25])
    r = series_condition("THM51", {"x2": x2}, horizon=16)
    n = np.arange(1, 4)
    assert r.partial_sum == pytest.approx(float((x2 * np.log(n) * np.log(n) ** 2).sum()))
    assert r.tail_bound == 0.0 and r.verdict == "converges"
    r = series_condition("THM42", {"alpha": [1.0, 1.0, 1.0], "A": np.arange(1.0, 20.0), "p": 2,
                                   "q": 2, "form": "dyadic"}, horizon=16)
    # levels: A=1 -> {0}, A=2 -> {1, 0}, A=3 -> {1}
    assert r.partial_sum == pytest.approx(2.0 + math.sqrt(2) * 2.0)


def test_series_input_errors():
    with pytest.raises(ValueError):
        series_condition("THM99", {})
    with pytest.raises(ValueError):
        series_condition("THM51", {"x2": [1.0]}, horizon=8)


def test_uniform_tail_diagnostic():
    n = 2 ** 10 - 1
    x = 1.0 / np.arange(1, n + 1) ** 2
    d = uniform_tail_diagnostic(x, np.arange(1.0, n + 1), Box(1.0, 1), BlockSchedule.dyadic(10))
    assert d.cauchy_consistent
    # a positive sum peaks at t = 0, so the block sup is the plain block sum
    for (a, b), lo, up in zip(d.blocks, d.lower, d.sups):
        assert lo - 1e-9 <= x[a - 1:b].sum() <= up + 1e-9
    flat = uniform_tail_diagnostic(np.ones(n), np.arange(1.0, n + 1), Box(1.0, 1),
                                   BlockSchedule.dyadic(10))
    assert not flat.cauchy_consistent
    with pytest.raises(BudgetExceeded):
        uniform_tail_diagnostic(np.exp(1j * np.arange(n) ** 2), np.arange(1.0, n + 1),
                                Box(1.0, 1), BlockSchedule.dyadic(10), tol=1e-12, rtol=0.0,
                                max_evals=50)
