"""Random trigonometric polynomials and their maxima.

With fair random signs the maximum of ``|sum_{k<=n} eps_k e^{ikt}|`` grows like
``sqrt(n log n)``.  The certified engine makes the Monte Carlo mean an upper
estimate, so the ratio printed below cannot be an artefact of a coarse grid.
The second part checks an Orlicz-type maximal bound on the same sums.
"""
import math

import numpy as np

from aptrig.expsum import Box
from aptrig.inequality_lab import check_bound, salem_zygmund_growth
from aptrig.random_processes import ProcessSpec

print("   n   E max |P_n|   / sqrt(n log n)")
for row in salem_zygmund_growth([2 ** k for k in range(5, 11)], trials=100, seed=5, threads=4):
    print(f"{row.n:5d}  {row.mean_max:10.3f}   {row.ratio:.3f} +- {row.ratio_stderr:.3f}")

lam = np.arange(1.0, 33.0)
for family in ("rademacher", "bounded_mds", "m_dependent"):
    spec = ProcessSpec(family, window=2)
    r = check_bound("THM31_ORLICZ", spec, lam, 0, 32, Box(math.pi, 1), trials=500, seed=5,
                    threads=4)
    print(f"THM31_ORLICZ with {family:12s}: mean {r.lhs:.6f} +- {r.stderr:.1e}, "
          f"bound {r.rhs:.1f}, margin {r.margin:.0f}")
