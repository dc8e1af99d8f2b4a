"""sigma-systems: function families whose partial-sum maxima are attained on large sets.

A sequence ``f_1, f_2, ...`` on ``(K, nu)`` is a ``{sigma_n}``-system with
constants ``rho1 > 0`` and ``0 < rho2 < 1`` when, for all coefficients and
every ``m``, the set where ``max_{n<=m} |sum_{k<=n} a_k f_k|`` reaches
``rho2`` times its maximum over ``K`` has measure at least ``rho1 / sigma_m``.

Exponentials ``exp(i <lam_n, t>)`` on ``[-T, T]^s`` with ``T >= 1`` are such
systems with

* ``sigma_m = (6 s m)^s prod_i (|lam_m^i|* + 1)``, ``rho1 = 1``, ``rho2 = 1/2``;
* ``sigma_m = (4 s)^s prod_i (lam_m^i + 1)`` when every coordinate sequence is
  positive and nondecreasing.

Here ``|lam_m^i|* = max_{k<=m} |lam_k^i|``.  The uniform variants drop the
``(6 s)^s`` (or ``(4 s)^s``) factor, which moves into ``rho1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _certify
from .expsum import Box, ExpSum, running_partial_max

__all__ = ["SigmaSystem", "SigmaReport", "sigma_exponential", "sigma_uniform",
           "exponential_system", "uniform_system", "constant_system",
           "is_monotone", "verify_sigma_property"]


def _as_freqs(freqs, s=None):
    lam = np.asarray(freqs, dtype=float)
    if lam.ndim == 1:
        lam = lam.reshape(-1, 1) if s in (None, 1) else lam.reshape(-1, s)
    if s is not None and lam.shape[1] != s:
        raise ValueError(f"frequencies have {lam.shape[1]} components, expected {s}")
    return lam


def is_monotone(freqs):
    """True when every coordinate sequence is positive and nondecreasing."""
    lam = _as_freqs(freqs)
    return bool(lam.size and np.all(lam > 0) and np.all(np.diff(lam, axis=0) >= 0))


def _star(lam, m):
    if not 1 <= m <= lam.shape[0]:
        raise ValueError(f"need 1 <= m <= {lam.shape[0]}, got {m}")
    return np.abs(lam[:m]).max(axis=0)


def sigma_exponential(s, freqs, m, monotone=False):
    """``sigma_m`` of the exponential system on ``[-T, T]^s``, ``T >= 1``.

    >>> sigma_exponential(1, [1, 2, 3], 3, monotone=True)
    16.0
    >>> sigma_exponential(1, [3, 1], 2)
    48.0
    """
    lam = _as_freqs(freqs, s)
    if monotone:
        if not is_monotone(lam[:m]):
            raise ValueError("monotone flag needs positive nondecreasing frequencies")
        return float((4 * s) ** s * np.prod(lam[m - 1] + 1.0))
    return float((6 * s * m) ** s * np.prod(_star(lam, m) + 1.0))


def sigma_uniform(s, freqs, n, monotone=False):
    """``sigma_n`` of the uniform exponential system on ``{[-r, r]^s}``.

    >>> sigma_uniform(1, [1, 2, 3, 4, 5], 5)
    30.0
    """
    lam = _as_freqs(freqs, s)
    if monotone:
        if not is_monotone(lam[:n]):
            raise ValueError("monotone flag needs positive nondecreasing frequencies")
        return float(np.prod(lam[n - 1] + 1.0))
    return float(n ** s * np.prod(_star(lam, n) + 1.0))


@dataclass(frozen=True)
class SigmaSystem:
    """A function family with its ``sigma`` sequence and constants.

    ``freqs`` holds the frequency vectors of the exponential family; the
    constant family ``f_n = 1`` is the exponential family with zero
    frequencies.  ``sigma`` is a tuple ``(sigma_1, ..., sigma_N)``.
    """

    sigma: tuple
    rho1: float
    rho2: float
    freqs: np.ndarray
    label: str = "exponential"

    def __post_init__(self):
        sig = tuple(float(x) for x in self.sigma)
        if not sig or sig[0] < 1 or any(b < a for a, b in zip(sig, sig[1:])):
            raise ValueError("sigma must be nondecreasing with sigma_1 >= 1")
        if not self.rho1 > 0 or not 0 < self.rho2 < 1:
            raise ValueError("need rho1 > 0 and 0 < rho2 < 1")
        object.__setattr__(self, "sigma", sig)
        lam = np.array(self.freqs, dtype=float)
        lam.setflags(write=False)
        object.__setattr__(self, "freqs", lam)

    @property
    def dim(self):
        return self.freqs.shape[1]

    def sigma_at(self, m):
        if not 1 <= m <= len(self.sigma):
            raise ValueError(f"sigma is known for m <= {len(self.sigma)}")
        return self.sigma[m - 1]


def exponential_system(freqs, monotone=None, rho1=1.0, rho2=0.5):
    """Exponential system with the ``sigma`` values of :func:`sigma_exponential`.

    ``monotone=None`` picks the monotone formula whenever the data allow it.
    """
    lam = _as_freqs(freqs)
    if monotone is None:
        monotone = is_monotone(lam)
    sig = [sigma_exponential(lam.shape[1], lam, m, monotone) for m in range(1, lam.shape[0] + 1)]
    return SigmaSystem(tuple(sig), rho1, rho2, lam,
                       "exponential-monotone" if monotone else "exponential")


def uniform_system(freqs, monotone=None, rho2=0.5):
    """Uniform exponential system; ``rho1 = (6s)^-s`` (or ``(4s)^-s`` when monotone)."""
    lam = _as_freqs(freqs)
    s = lam.shape[1]
    if monotone is None:
        monotone = is_monotone(lam)
    sig = [sigma_uniform(s, lam, n, monotone) for n in range(1, lam.shape[0] + 1)]
    rho1 = float((4 * s) ** -s if monotone else (6 * s) ** -s)
    return SigmaSystem(tuple(sig), rho1, rho2, lam, "uniform")


def constant_system(n, s=1, sigma=1.0, rho1=1.0, rho2=0.5):
    """The constant family ``f_k = 1``; any ``sigma >= 1`` works."""
    return SigmaSystem(tuple([float(sigma)] * n), rho1, rho2, np.zeros((n, s)), "constant")


@dataclass(frozen=True)
class SigmaReport:
    """Outcome of :func:`verify_sigma_property`.

    ``measure`` is a certified lower bound on the measure of the qualifying
    set and ``measure_upper`` a certified upper bound.  ``status`` is
    ``"pass"`` when ``measure >= required``, ``"fail"`` when
    ``measure_upper < required`` and ``"too_coarse"`` when the grid cannot
    decide.  ``grid_estimate`` is the plain cell-centre estimate.
    """

    measure: float
    measure_upper: float
    grid_estimate: float
    required: float
    status: str
    M_lower: float
    M_upper: float
    cells: int

    @property
    def passed(self):
        return self.status == "pass"


def _bounds_chunked(model, centers, h, T):
    C = centers.shape[0]
    F, J = model.n, model.cols.shape[1]
    step = max(1, (1 << 20) // (F * J))
    val = np.empty(C)
    ub = np.empty(C)
    lb = np.empty(C)
    for a in range(0, C, step):
        b = min(C, a + step)
        data = _certify.direct_data(model, centers[a:b])
        v, u, low = _certify.cell_bounds(model, data, h[a:b], T, want_lower=True)
        val[a:b], ub[a:b], lb[a:b] = v.max(axis=1), u.max(axis=1), low.max(axis=1)
    return val, ub, lb


def verify_sigma_property(system, coeffs, m, box, grid=None, max_cells=400_000, tol=None):
    """Measure the set where the running partial maximum reaches ``rho2 * M``.

    Parameters
    ----------
    system : SigmaSystem
    coeffs : array_like
        Coefficients ``a_1..a_m`` (extra entries are ignored).
    m : int
    box : Box
        ``[-T, T]^s``; exponential systems need ``T >= 1``.
    grid : int or sequence of int, optional
        Cells per axis for the first sweep.  The default ties the cell size to
        the frequencies (about eight cells per oscillation).
    max_cells : int
        Budget for cell evaluations during refinement.

    Returns
    -------
    SigmaReport
    """
    a = np.asarray(coeffs, dtype=complex).reshape(-1)
    if not 1 <= m <= min(a.size, system.freqs.shape[0]):
        raise ValueError("m exceeds the available coefficients or frequencies")
    if box.dim != system.dim:
        raise ValueError("box dimension does not match the system")
    if system.label != "constant":
        box.require_unit()
    s, T = system.dim, box.half_width
    lam = system.freqs[:m]
    P = ExpSum(a[:m], lam, s)
    required = system.rho1 / system.sigma_at(m)
    vol = box.volume
    if not np.any(a[:m]):
        return SigmaReport(vol, vol, vol, required, "pass" if vol >= required else "fail",
                           0.0, 0.0, 0)
    bracket = running_partial_max(P, m, box, tol=tol or 1e-9, rtol=1e-6)
    Mlo, Mup = bracket.lower, bracket.upper
    lo_thr, hi_thr = system.rho2 * Mup, system.rho2 * Mlo
    model = _certify.build_model(P.coeffs, P.freqs, prefix=True)
    if grid is None:
        osc = np.abs(lam).max(axis=0) * T / math.pi
        counts = [max(1, math.ceil(8 * o)) for o in osc]
        while math.prod(counts) * m > 4_000_000 and max(counts) > 1:
            counts = [max(1, c // 2) for c in counts]
    else:
        counts = [int(grid)] * s if np.isscalar(grid) else [int(g) for g in grid]
    centers = _certify.grid_centers(T, counts)
    h = np.tile(np.array([T / c for c in counts]), (centers.shape[0], 1))
    val, ub, lb = _bounds_chunked(model, centers, h, T)
    cell_vol = np.prod(2.0 * h, axis=1)
    estimate = float(cell_vol[val >= hi_thr].sum())
    sure = float(cell_vol[lb >= lo_thr].sum())
    maybe = float(cell_vol[ub >= hi_thr].sum())
    und = (lb < lo_thr) & (ub >= hi_thr)
    cells_c, cells_h, cells_v = centers[und], h[und], val[und]
    used = centers.shape[0]
    verts = np.array(list(np.ndindex(*([2] * s)))) * 2.0 - 1.0
    while sure < required <= maybe and cells_c.shape[0] and used < max_cells:
        order = np.argsort(-cells_v, kind="stable")
        take = order[:256]
        rest = order[256:]
        pc, ph = cells_c[take], cells_h[take]
        child_h = np.repeat(ph / 2.0, len(verts), axis=0)
        child_c = (pc[:, None, :] + verts[None, :, :] * (ph / 2.0)[:, None, :]).reshape(-1, s)
        v, u, low = _bounds_chunked(model, child_c, child_h, T)
        used += child_c.shape[0]
        parent_vol = float(np.prod(2.0 * ph, axis=1).sum())
        cv = np.prod(2.0 * child_h, axis=1)
        maybe -= parent_vol - float(cv[u >= hi_thr].sum())
        sure += float(cv[low >= lo_thr].sum())
        keep = (low < lo_thr) & (u >= hi_thr)
        cells_c = np.concatenate([cells_c[rest], child_c[keep]])
        cells_h = np.concatenate([cells_h[rest], child_h[keep]])
        cells_v = np.concatenate([cells_v[rest], v[keep]])
    if sure >= required:
        status = "pass"
    elif maybe < required:
        status = "fail"
    else:
        status = "too_coarse"
    return SigmaReport(sure, maybe, estimate, required, status, Mlo, Mup, used)
