import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aptrig.ergodic_sim import (BernoulliWindowFunction, FourierFunction, PowerSchedule,
                                TorusRotationSystem, apply_powers, default_angles,
                                digit_function, normalized_series, prop63_check, prop63_function,
                                spectral_transfer_check, weighted_series_partial_sums,
                                ww_constant, ww_exponent_fit, ww_norm, ww_rhs_prop61)


def test_default_angles_frozen():
    assert default_angles(3) == pytest.approx([math.sqrt(2) - 1, math.sqrt(3) - 1, math.sqrt(5) - 2])
    assert TorusRotationSystem.default(2).s == 2


def test_apply_powers_is_composition_with_rotation():
    rng = np.random.default_rng(0)
    sysm = TorusRotationSystem.default(2)
    f = FourierFunction.random(5, rng)
    y = rng.random(50)
    j = np.array([3, 7])
    g = apply_powers(f, j, sysm)
    assert np.allclose(g(y), f(y + sysm.shift(j)))
    assert g.norm() == pytest.approx(f.norm())
    with pytest.raises(ValueError):
        apply_powers(f, np.array([-1, 0]), sysm)


def test_transfer_lhs_matches_quadrature():
    rng = np.random.default_rng(1)
    sysm = TorusRotationSystem.default(1)
    f = FourierFunction.random(4, rng, max_mode=6)
    sched = PowerSchedule(rng.integers(0, 9, (5, 1)))
    a = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    chk = spectral_transfer_check(a, sched, f, sysm)
    y = np.arange(4096) / 4096
    h = sum(ak * apply_powers(f, jk, sysm)(y) for ak, jk in zip(a, sched.j))
    assert chk.lhs == pytest.approx(math.sqrt(np.mean(np.abs(h) ** 2)), rel=1e-10)
    assert chk.holds and chk.sup_lower <= chk.rhs


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 2), st.integers(1, 12))
def test_transfer_inequality_random(seed, s, n):
    rng = np.random.default_rng(seed)
    sysm = TorusRotationSystem.default(s)
    f = FourierFunction.random(int(rng.integers(1, 6)), rng)
    sched = PowerSchedule(rng.integers(0, 20, (n, s)))
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    chk = spectral_transfer_check(a, sched, f, sysm)
    assert chk.status == "ok" and chk.lhs <= chk.rhs + 1e-9


def test_series_partial_sums_and_tails():
    rng = np.random.default_rng(2)
    sysm = TorusRotationSystem.default(1)
    f = FourierFunction({1: 1.0, -2: 0.5j})
    sched = PowerSchedule.identity(64)
    x = rng.standard_normal(64) / np.arange(1, 65)
    y = np.array([0.1, 0.7])
    tr = weighted_series_partial_sums(x, sched, f, sysm, y, [8, 32, 64])
    direct = sum(x[n] * apply_powers(f, sched.j[n], sysm)(y) for n in range(32))
    assert np.allclose(tr.values[1], direct)
    assert tr.tails[-1] == 0.0 and tr.tails[0] >= tr.tails[1]
    assert tr.to_csv().splitlines()[0] == "N,y,re,im,tail_l2"
    q1 = normalized_series(x, sched, f, sysm, 1.0, y, [64])
    x1 = x / np.sqrt(np.arange(1, 65))
    assert np.allclose(q1.values, weighted_series_partial_sums(x1, sched, f, sysm, y, [64]).values)
    with pytest.raises(ValueError):
        normalized_series(x, sched, f, sysm, 3.0, y, [64])
    with pytest.raises(ValueError):
        weighted_series_partial_sums(x, sched, f, sysm, y, [32, 8])


def test_window_functions():
    f = prop63_function(2, [1, 0])
    assert f.table.tolist() == [-0.25, -0.25, 0.75, -0.25]
    assert f.realize(np.array([1, 0, 1, 1]), 3).tolist() == [0.75, -0.25, -0.25]
    assert digit_function().realize(np.array([0, 1]), 2).tolist() == [-1.0, 1.0]
    with pytest.raises(ValueError):
        BernoulliWindowFunction([1.0, 1.0])
    with pytest.raises(ValueError):
        BernoulliWindowFunction([2.0, -2.0])
    with pytest.raises(ValueError):
        prop63_function(2, [1])


def test_ww_norm_small_cases():
    # n = 1: |f o theta| = 1 for the digit function
    assert ww_norm(digit_function(), 1, trials=5).value == pytest.approx(1.0, abs=1e-6)
    a = ww_norm(digit_function(), 64, trials=20, seed=3, threads=1)
    b = ww_norm(digit_function(), 64, trials=20, seed=3, threads=4)
    assert a == b
    assert a.value < ww_rhs_prop61(digit_function(), 64)


def test_constants_and_fit():
    assert ww_constant(2) == pytest.approx(705, rel=2e-3)
    fit = ww_exponent_fit([4, 16, 64], [0.5, 0.25, 0.125])
    # const is the log-scale intercept: norm = exp(const) n^-alpha
    assert fit.alpha == pytest.approx(0.5) and fit.const == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(TypeError):
        ww_rhs_prop61(FourierFunction({1: 1.0}), 8)


def test_prop63_small():
    rep = prop63_check(prop63_function(2, [1, 1]), [16, 64], trials=20, seed=1)
    assert rep.passed and rep.margin > 1
    assert len(rep.ratios) == 2
