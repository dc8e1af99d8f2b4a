"""Random weights on ergodic systems.

Rotations of the circle act on trigonometric polynomials by phase shifts, so
``||sum_k a_k V^{j_k} f||_2`` is computed exactly and compared with ``||f||_2``
times the certified sup of the associated exponential sum.  On the Bernoulli
shift, the Wiener-Wintner averages of the digit function decay like
``n^(-1/2)`` up to logarithms.
"""
import numpy as np

from aptrig.ergodic_sim import (FourierFunction, PowerSchedule, TorusRotationSystem,
                                digit_function, normalized_series, prop63_check,
                                prop63_function, spectral_transfer_check, ww_exponent_fit,
                                ww_norm)
from aptrig.random_processes import ProcessSpec, sample_path

rng = np.random.default_rng(3)
system = TorusRotationSystem.default(2)
f = FourierFunction.random(5, rng)
sched = PowerSchedule(rng.integers(0, 30, (16, 2)))
a = rng.standard_normal(16) + 1j * rng.standard_normal(16)
chk = spectral_transfer_check(a, sched, f, system)
print(f"transfer: ||sum a_k V^j_k f|| = {chk.lhs:.4f} <= {chk.rhs:.4f}")

rot = TorusRotationSystem.default(1)
x = sample_path(ProcessSpec("rademacher"), 4096, trial=1).values
tr = normalized_series(x, PowerSchedule.identity(4096), FourierFunction({1: 1.0, 3: 0.5}), rot,
                       q=1.5, y=[0.0, 0.3], N_grid=[64, 256, 1024, 4096])
print("L2 distance to the final partial sum:", np.round(tr.tails, 4))

grid = [2 ** k for k in range(6, 12)]
norms = [ww_norm(digit_function(), n, trials=40, seed=3, threads=4).value for n in grid]
fit = ww_exponent_fit(grid, norms)
print(f"digit function: Wiener-Wintner exponent {fit.alpha:.3f} +- {fit.stderr:.3f}")
rep = prop63_check(prop63_function(2, [1, 0]), [64, 256], trials=30, seed=3, threads=4)
print(f"window-2 pattern function: sqrt(n) * norm <= {rep.bound:.0f}, worst ratio "
      f"{max(rep.ratios):.3f}, passed {rep.passed}")
