"""Block schedules and convergence conditions for random series.

The blocks on which ``A_k (log k)^p`` grows by at most a factor ``e`` drive the
maximal inequalities for weighted series.  For exact power-log inputs each
condition splits into a partial sum up to the horizon plus a rigorous tail
bound, and the exponents decide convergence.
"""
import math

import numpy as np

from aptrig.convergence import (BlockSchedule, PowerLog, WeightSequence,
                                check_kappa_properties, dyadic_blocks, kappa_blocks,
                                series_condition, uniform_tail_diagnostic)
from aptrig.expsum import Box
from aptrig.random_processes import ProcessSpec, sample_path

A = WeightSequence(PowerLog(1.0, 1.0, 0.0, 1), C=1.0, gamma=1.0)
sched = kappa_blocks(A, 2.0, 10 ** 5)
print("kappa blocks for A_k = k, p = 2:", sched.blocks[:6], "...")
print("properties (i)-(iii):", check_kappa_properties(sched, A, 2.0))
print("dyadic blocks for A_k = k:", dyadic_blocks(A, 64).blocks)

for b in (-4.1, -3.5):
    r = series_condition("THM51", {"x2": PowerLog(1.0, -1.0, b)})
    print(f"||X_k||^2 = 1/(k log^{-b} k): partial {r.partial_sum:.4f}, tail <= {r.tail_bound:.4g}"
          f" -> {r.verdict}")

# A realized series: dyadic block sums of X_k e^{ikt} / k shrink uniformly in t.
top = 12
x = sample_path(ProcessSpec("rademacher"), 2 ** top - 1, trial=0).values / np.arange(1, 2 ** top)
d = uniform_tail_diagnostic(x, np.arange(1.0, 2 ** top), Box(math.pi, 1),
                            BlockSchedule.dyadic(top), threads=4)
for (lo, hi), s in zip(d.blocks, d.sups):
    print(f"  block [{lo:5d}, {hi:5d}]  sup_t |block sum| <= {s:.4f}")
print("Cauchy-consistent:", d.cauchy_consistent)
