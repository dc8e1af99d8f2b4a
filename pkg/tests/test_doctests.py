import doctest
import importlib

import pytest

MODULES = ["aptrig.expsum", "aptrig.sigma_systems", "aptrig.random_processes",
           "aptrig.inequality_lab", "aptrig.convergence", "aptrig.ergodic_sim", "aptrig.cli",
           "aptrig._certify", "aptrig._rng"]


@pytest.mark.parametrize("name", MODULES)
def test_docstring_examples(name):
    mod = importlib.import_module(name)
    res = doctest.testmod(mod, optionflags=doctest.ELLIPSIS | doctest.NORMALIZE_WHITESPACE)
    assert res.failed == 0
