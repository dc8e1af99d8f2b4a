import math

import numpy as np
import pytest

from aptrig.expsum import Box
from aptrig.sigma_systems import (SigmaSystem, constant_system, exponential_system, is_monotone,
                                  sigma_exponential, sigma_uniform, uniform_system,
                                  verify_sigma_property)


def test_sigma_formulas_frozen():
    assert sigma_exponential(1, [1, 2, 3], 3, monotone=True) == 16.0
    assert sigma_exponential(1, [3, 1], 2) == 48.0
    # s = 2, m = 2: (12 * 2)^2 * (3 + 1) * (2 + 1)
    assert sigma_exponential(2, [[1, -2], [3, 0]], 2) == 576.0 * 12
    assert sigma_uniform(1, [1, 2, 3, 4, 5], 5) == 30.0
    assert sigma_uniform(1, [1, 2, 3], 3, monotone=True) == 4.0


def test_monotone_detection():
    assert is_monotone([1, 2, 2, 5])
    assert not is_monotone([1, 0.5])
    assert not is_monotone([0, 1])
    assert exponential_system([1, 2, 3]).label == "exponential-monotone"
    assert exponential_system([3, 2, 1]).label == "exponential"


def test_uniform_system_rho1():
    assert uniform_system([[1.0, 1.0], [2.0, 2.0]]).rho1 == pytest.approx(1 / 64)
    assert uniform_system([[-1.0], [2.0]]).rho1 == pytest.approx(1 / 6)


def test_invalid_systems():
    with pytest.raises(ValueError):
        SigmaSystem((2.0, 1.0), 1.0, 0.5, np.zeros((2, 1)))
    with pytest.raises(ValueError):
        SigmaSystem((1.0,), 1.0, 1.0, np.zeros((1, 1)))
    with pytest.raises(ValueError):
        exponential_system([1, 2]).sigma_at(3)


def test_verify_needs_unit_box():
    with pytest.raises(ValueError):
        verify_sigma_property(exponential_system([1, 2]), [1, 1], 2, Box(0.5, 1))


def test_constant_system_passes_everywhere():
    r = verify_sigma_property(constant_system(4), [1, -1, 1, 0.5], 4, Box(1.0, 1))
    assert r.passed and r.measure == pytest.approx(2.0)
    # the constant family works on any box, but a short interval is too small for rho1 = 1
    small = verify_sigma_property(constant_system(4), [1, -1, 1, 0.5], 4, Box(0.3, 1))
    assert small.status == "fail" and small.measure == pytest.approx(0.6)


def test_zero_coefficients_pass():
    r = verify_sigma_property(exponential_system([1, 2]), [0, 0], 2, Box(1.0, 1))
    assert r.passed and r.measure == 2.0


def test_random_draws_pass():
    rng = np.random.default_rng(4)
    for _ in range(15):
        s = int(rng.integers(1, 3))
        m = int(rng.integers(1, 12))
        lam = rng.uniform(-6, 6, (m, s))
        a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        r = verify_sigma_property(exponential_system(lam), a, m, Box(1.0, s))
        assert r.passed, r
        assert r.measure <= r.grid_estimate + 1e-12 <= r.measure_upper + 2e-12


def test_impossible_rho2_can_fail():
    # with rho2 close to 1 the qualifying set of a single peak is tiny
    n = 30
    lam = np.arange(1.0, n + 1)[:, None]
    sysm = SigmaSystem(tuple([1.0] * n), 1.0, 0.999, lam)
    r = verify_sigma_property(sysm, np.ones(n), n, Box(1.0, 1))
    assert r.status == "fail"
