"""Suprema of almost periodic polynomials with random coefficients.

Modules
-------
expsum
    Exponential sums, certified suprema and witness rectangles.
sigma_systems
    ``sigma``-systems and a certified check of their defining property.
random_processes
    Coefficient processes and the normalizers of the maximal inequalities.
inequality_lab
    Explicit constants and Monte Carlo checks of the maximal inequalities.
convergence
    Block schedules and series conditions for a.e. uniform convergence.
ergodic_sim
    Rotations, randomly weighted ergodic series and Wiener-Wintner estimates.
"""
__version__ = "0.1.0"

from .expsum import Box, CertifiedBound, ExpSum, certified_sup, running_partial_max  # noqa: E402

__all__ = ["__version__", "Box", "CertifiedBound", "ExpSum", "certified_sup",
           "running_partial_max"]
