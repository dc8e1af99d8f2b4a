"""Commuting rotations, randomly weighted ergodic series and Wiener-Wintner estimates.

Two concrete dynamical systems are used.

* Rotations of the circle ``y -> y + alpha_i (mod 1)``, ``i = 1..s``.  They
  commute, and characters ``e_m(y) = exp(2 pi i m y)`` diagonalize them, so
  for a finite Fourier series ``f`` every quantity in the transfer inequality

      ``|| sum_k a_k V^{j_k} f ||_2 <= ||f||_2 max_{t in [-pi, pi]^s} |sum_k a_k exp(i <j_k, t>)|``

  is exactly computable on the left.
* The Bernoulli shift on fair bits, with ``f o theta^k`` realized as a fixed
  function of the bit window starting at position ``k``.

Examples
--------
>>> rot = TorusRotationSystem([0.25])
>>> f = FourierFunction({1: 1.0})
>>> c = apply_powers(f, [1], rot).modes[1]
>>> round(c.real, 12) + 0.0, round(c.imag, 12)
(0.0, 1.0)
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._rng import map_trials, stream
from .expsum import Box, ExpSum, certified_sup
from .inequality_lab import thm31_constants
from .sigma_systems import sigma_exponential

__all__ = ["TorusRotationSystem", "FourierFunction", "PowerSchedule", "BernoulliWindowFunction",
           "TransferCheck", "Trajectory", "WWEstimate", "ExponentFit", "Prop63Report",
           "default_angles", "apply_powers", "spectral_transfer_check",
           "weighted_series_partial_sums", "normalized_series", "ww_norm", "ww_rhs_prop61",
           "ww_constant", "ww_exponent_fit", "digit_function", "prop63_function",
           "prop63_check"]


def default_angles(s):
    """``(sqrt(2) - 1, sqrt(3) - 1, sqrt(5) - 2, ...)``: fractional parts of square roots of primes."""
    primes, k = [], 2
    while len(primes) < s:
        if all(k % q for q in primes):
            primes.append(k)
        k += 1
    return [math.sqrt(q) % 1.0 for q in primes]


@dataclass(frozen=True)
class TorusRotationSystem:
    """``s`` commuting rotations ``tau_i y = y + alphas[i] (mod 1)`` of the circle."""

    alphas: tuple

    def __post_init__(self):
        a = tuple(float(x) % 1.0 for x in np.atleast_1d(self.alphas))
        if not a:
            raise ValueError("need at least one rotation")
        object.__setattr__(self, "alphas", a)

    @classmethod
    def default(cls, s=1):
        return cls(tuple(default_angles(s)))

    @property
    def s(self):
        return len(self.alphas)

    def shift(self, j):
        """Total rotation ``<j, alpha> mod 1`` for a power vector ``j``."""
        return float(np.dot(np.asarray(j, dtype=float).reshape(self.s), self.alphas) % 1.0)


@dataclass(frozen=True)
class FourierFunction:
    """``f(y) = sum_m c_m exp(2 pi i m y)`` with finitely many integer modes."""

    modes: dict

    def __post_init__(self):
        object.__setattr__(self, "modes", {int(m): complex(c) for m, c in dict(self.modes).items()})

    @property
    def freqs(self):
        return np.array(sorted(self.modes), dtype=np.int64)

    @property
    def coeffs(self):
        return np.array([self.modes[m] for m in sorted(self.modes)], dtype=complex)

    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if not self.modes:
            return np.zeros(y.shape, dtype=complex)
        return np.exp(2j * np.pi * np.multiply.outer(y, self.freqs)) @ self.coeffs

    @classmethod
    def random(cls, n_modes, rng, max_mode=20):
        ms = rng.choice(np.arange(-max_mode, max_mode + 1), size=n_modes, replace=False)
        c = rng.standard_normal(n_modes) + 1j * rng.standard_normal(n_modes)
        return cls(dict(zip(ms.tolist(), c.tolist())))


@dataclass(frozen=True)
class PowerSchedule:
    """Power vectors ``j_1, j_2, ...`` in ``N^s`` (rows of ``j``)."""

    j: np.ndarray

    def __post_init__(self):
        j = np.array(self.j, dtype=np.int64)
        j = j.reshape(-1, 1) if j.ndim == 1 else j
        if j.ndim != 2 or np.any(j < 0):
            raise ValueError("powers must be a nonnegative integer array of shape (n, s)")
        j.setflags(write=False)
        object.__setattr__(self, "j", j)

    @property
    def n(self):
        return self.j.shape[0]

    @property
    def s(self):
        return self.j.shape[1]

    def star(self):
        """Running maxima ``|j_m|* = max_{n <= m} max_i j_n^i``."""
        return np.maximum.accumulate(self.j.max(axis=1))

    @classmethod
    def identity(cls, n, s=1):
        return cls(np.tile(np.arange(1, n + 1)[:, None], (1, s)))


def apply_powers(f, j, system):
    """``V^j f``: each mode ``c_m`` picks up the phase ``exp(2 pi i m <j, alpha>)``."""
    j = np.asarray(j)
    if np.any(j < 0):
        raise ValueError("powers must be nonnegative")
    phase = system.shift(j)
    return FourierFunction({m: c * np.exp(2j * np.pi * ((m * phase) % 1.0))
                            for m, c in f.modes.items()})


def _phases(f, sched, system):
    """Matrix ``exp(2 pi i m <j_k, alpha>)`` of shape (n, modes)."""
    shift = (sched.j.astype(float) @ np.asarray(system.alphas)) % 1.0
    return np.exp(2j * np.pi * ((np.multiply.outer(shift, f.freqs.astype(float))) % 1.0))


@dataclass(frozen=True)
class TransferCheck:
    lhs: float
    rhs: float
    sup_lower: float
    status: str

    @property
    def holds(self):
        return self.lhs <= self.rhs


def spectral_transfer_check(coeffs, schedule, f, system, tol=1e-9, *, rtol=1e-4, max_evals=10**6):
    """Exact ``||sum_k a_k V^{j_k} f||_2`` against ``||f||_2`` times the certified supremum.

    The certified supremum is taken over ``[-pi, pi]^s`` for the polynomial
    ``sum_k a_k exp(i <j_k, t>)``; its upper end enters ``rhs``, so the
    comparison stays valid even when the bracket is wide.  ``tol`` and
    ``rtol`` set the target width of that bracket.
    """
    a = np.asarray(coeffs, dtype=complex).reshape(-1)
    if a.size != schedule.n or schedule.s != system.s:
        raise ValueError("coefficients, schedule and system do not match")
    if not f.modes or not np.any(a):
        return TransferCheck(0.0, 0.0, 0.0, "ok")
    amp = a @ _phases(f, schedule, system)
    lhs = float(np.sqrt(np.sum(np.abs(amp) ** 2 * np.abs(f.coeffs) ** 2)))
    P = ExpSum(a, schedule.j.astype(float))
    b = certified_sup(P, Box(math.pi, schedule.s), tol=tol, rtol=rtol, max_evals=max_evals)
    return TransferCheck(lhs, f.norm() * b.upper, f.norm() * b.lower, b.status)


@dataclass(frozen=True)
class Trajectory:
    """Partial sums ``S_N(y)`` at the points ``y`` and exact ``L_2`` tail norms.

    ``tails[i] = ||S_{N_max} - S_{N_grid[i]}||_2``.  ``settles_from`` is the
    first grid index from which the tails are nonincreasing.
    """

    N_grid: tuple
    y: np.ndarray
    values: np.ndarray
    tails: np.ndarray
    settles_from: int

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "y", "re", "im", "tail_l2"])
        for i, N in enumerate(self.N_grid):
            for yy, v in zip(self.y, self.values[i]):
                w.writerow([N, repr(float(yy)), repr(float(v.real)), repr(float(v.imag)),
                            repr(float(self.tails[i]))])
        return buf.getvalue()


def weighted_series_partial_sums(path, schedule, f, system, y, N_grid):
    """``S_N(y) = sum_{n <= N} X_n (V^{j_n} f)(y)`` for ``N`` in ``N_grid``.

    Parameters
    ----------
    path : array_like or SamplePath
        Weights ``X_1, X_2, ...``.
    schedule : PowerSchedule
    f : FourierFunction
    system : TorusRotationSystem
    y : array_like
        Evaluation points in ``[0, 1)``.
    N_grid : sequence of int
        Increasing horizons.
    """
    x = np.asarray(getattr(path, "values", path), dtype=complex).reshape(-1)
    return _series(x, schedule, f, system, y, N_grid)


def _series(x, schedule, f, system, y, N_grid):
    grid = tuple(int(N) for N in N_grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
        raise ValueError("N_grid must be increasing and positive")
    Nmax = grid[-1]
    if x.size < Nmax or schedule.n < Nmax:
        raise ValueError("path or schedule shorter than the largest N")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if not f.modes:
        z = np.zeros((len(grid), y.size), dtype=complex)
        return Trajectory(grid, y, z, np.zeros(len(grid)), 0)
    sub = PowerSchedule(schedule.j[:Nmax])
    # mode amplitudes of S_N: c_m * sum_{n <= N} X_n exp(2 pi i m <j_n, alpha>)
    amps = np.cumsum(x[:Nmax, None] * _phases(f, sub, system), axis=0)
    idx = np.array(grid) - 1
    A = amps[idx] * f.coeffs[None, :]
    E = np.exp(2j * np.pi * np.multiply.outer(f.freqs.astype(float), y))
    values = A @ E
    tails = np.sqrt(np.sum(np.abs(A[-1][None, :] - A) ** 2, axis=1))
    inc = np.flatnonzero(np.diff(tails) > 0)
    settles = int(inc[-1] + 1) if inc.size else 0
    return Trajectory(grid, y, values, tails, settles)


def normalized_series(path, schedule, f, system, q, y, N_grid):
    """As :func:`weighted_series_partial_sums` with weights ``X_n / n^{(2-q)/(2q)}``, ``1 <= q <= 2``."""
    if not 1 <= q <= 2:
        raise ValueError("q must lie in [1, 2]")
    x = np.asarray(getattr(path, "values", path), dtype=complex).reshape(-1)
    if q != 2:
        x = x / np.arange(1, x.size + 1) ** ((2 - q) / (2 * q))
    return _series(x, schedule, f, system, y, N_grid)


@dataclass(frozen=True)
class BernoulliWindowFunction:
    """Function of ``k`` consecutive fair bits given by a table of ``2^k`` values.

    The table index of bits ``(b_0, ..., b_{k-1})`` is ``sum b_i 2^{k-1-i}``.
    Values are bounded by 1 and average to exactly zero.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float).reshape(-1)
        k = int(round(math.log2(t.size))) if t.size else -1
        if k < 1 or 2 ** k != t.size:
            raise ValueError("table length must be 2^k with k >= 1")
        if np.any(np.abs(t) > 1 + 1e-15):
            raise ValueError("table values must lie in [-1, 1]")
        if abs(math.fsum(t)) > 1e-12 * t.size:
            raise ValueError("table must have mean zero")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @property
    def window(self):
        return int(round(math.log2(self.table.size)))

    @property
    def sup_norm(self):
        return float(np.abs(self.table).max())

    def realize(self, bits, n):
        """Values ``f o theta^k``, ``k = 1..n``, from ``n + window - 1`` bits."""
        bits = np.asarray(bits, dtype=np.int64)
        k = self.window
        if bits.size < n + k - 1:
            raise ValueError("not enough bits")
        idx = np.zeros(n, dtype=np.int64)
        for i in range(k):
            idx = 2 * idx + bits[i:i + n]
        return self.table[idx]


def digit_function():
    """``f = 2 b_0 - 1``: the first bit as a random sign."""
    return BernoulliWindowFunction(np.array([-1.0, 1.0]))


def prop63_function(k, pattern):
    """Indicator of a bit pattern on the window, centered: ``1{bits = pattern} - 2^{-k}``.

    >>> prop63_function(1, [1]).table.tolist()
    [-0.5, 0.5]
    """
    pattern = np.asarray(pattern, dtype=np.int64).reshape(-1)
    if pattern.size != k or k < 1 or np.any((pattern != 0) & (pattern != 1)):
        raise ValueError("pattern must be a 0/1 vector of length k >= 1")
    t = np.full(2 ** k, -(2.0 ** -k))
    t[int("".join(map(str, pattern.tolist())), 2)] += 1.0
    return BernoulliWindowFunction(t)


@dataclass(frozen=True)
class WWEstimate:
    """``(E max_t |n^{-1} sum e^{ikt} f o theta^k|^p)^{1/p}`` with a standard error."""

    n: int
    p: float
    value: float
    stderr: float
    trials: int


def _ww_stats(f, n, trials, seed, tol, threads, max_evals):
    def one(i):
        bits = stream(seed, "ww", n, i).integers(0, 2, size=n + f.window - 1)
        y = f.realize(bits, n)
        if not np.any(y):
            return 0.0
        P = ExpSum(y / n, np.arange(1, n + 1, dtype=float))
        b = certified_sup(P, Box(math.pi, 1), tol=tol, rtol=1e-3, max_evals=max_evals)
        if b.status != "ok":
            raise RuntimeError(f"certified supremum exceeded its budget at n = {n}")
        return b.upper

    return np.array(map_trials(one, trials, threads))


def ww_norm(f, n, p=2.0, trials=100, seed=0, tol=1e-9, threads=1, max_evals=10**6):
    """Monte Carlo estimate of the Wiener-Wintner norm of ``f`` at length ``n``.

    Each trial draws fresh bits and uses the upper end of a certified
    supremum.  The standard error comes from the delta method.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if n < 1 or trials < 1:
        raise ValueError("need n >= 1 and trials >= 1")
    v = _ww_stats(f, n, trials, seed, tol, threads, max_evals) ** p
    mean = float(v.mean())
    if mean == 0:
        return WWEstimate(n, p, 0.0, 0.0, trials)
    se = float(v.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.inf
    val = mean ** (1 / p)
    return WWEstimate(n, p, val, se * val / (p * mean), trials)


def ww_constant(p):
    """``C_p`` of the bounded Lp maximal bound on ``[-pi, pi]`` with ``lam_k = k``."""
    return thm31_constants(1.0, 0.5, 2 * math.pi, 1.0, 1.0, p).c_p


def _cross_count(n, k):
    return sum(min(i - 1, k - 1) for i in range(2, n + 1))


def ww_rhs_prop61(f, n, p=2.0):
    """Right-hand side of the Wiener-Wintner bound for a bounded window function.

    ``C_p sqrt(log(sigma_n + 1)) / n * (n ||f||_inf^2 + cross)^{1/2}`` with
    ``sigma_n = 4 (n + 1)`` for ``lam_k = k`` and cross terms bounded by
    ``||f||_inf^2`` for each pair of overlapping windows (none for ``k = 1``).
    """
    if not isinstance(f, BernoulliWindowFunction):
        raise TypeError("only window functions have computable conditional expectations")
    if n < 1:
        raise ValueError("n must be >= 1")
    sig = sigma_exponential(1, np.arange(1, n + 1), n, monotone=True)
    R = f.sup_norm ** 2 * (n + _cross_count(n, f.window))
    return ww_constant(p) * math.sqrt(math.log(sig + 1.0) * R) / n


@dataclass(frozen=True)
class ExponentFit:
    alpha: float
    stderr: float
    const: float
    residuals: np.ndarray


def ww_exponent_fit(n_grid, norms):
    """Least-squares fit ``log norm = -alpha log n + c``.

    >>> round(ww_exponent_fit([4, 16, 64], [0.5, 0.25, 0.125]).alpha, 12)
    0.5
    """
    n = np.asarray(n_grid, dtype=float)
    v = np.asarray(norms, dtype=float)
    if n.size < 3 or n.size != v.size:
        raise ValueError("need at least three (n, norm) pairs")
    if np.unique(n).size < 2:
        raise ValueError("degenerate grid: all n equal")
    if np.any(v <= 0) or np.any(n <= 0):
        raise ValueError("n and norms must be positive")
    X = np.column_stack([-np.log(n), np.ones_like(n)])
    coef, _, _, _ = np.linalg.lstsq(X, np.log(v), rcond=None)
    res = np.log(v) - X @ coef
    dof = n.size - 2
    s2 = float(res @ res) / dof if dof > 0 else 0.0
    cov = s2 * np.linalg.inv(X.T @ X)
    return ExponentFit(float(coef[0]), float(math.sqrt(cov[0, 0])), float(coef[1]), res)


@dataclass(frozen=True)
class Prop63Report:
    """Ratios ``n * ww_norm / sqrt(n log(n + 1))`` against ``sqrt(k) C_p``."""

    n_grid: tuple
    ratios: tuple
    stderr: tuple
    bound: float
    passed: bool

    @property
    def margin(self):
        top = max(self.ratios) if self.ratios else 0.0
        return self.bound / top if top > 0 else math.inf

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value", "stderr", "bound"])
        for n, r, se in zip(self.n_grid, self.ratios, self.stderr):
            w.writerow([n, repr(r), repr(se), repr(self.bound)])
        return buf.getvalue()


def prop63_check(f, n_grid, p=2.0, trials=100, seed=0, threads=1):
    """Check ``||max_t |sum_k e^{ikt} f o theta^k| ||_p <= sqrt(k) C_p sqrt(n log(n + 1))``.

    ``C_p`` is :func:`ww_constant` times ``sqrt(log 9 / log 2)``, the largest
    value of ``sqrt(log(4(n+1) + 1) / log(n + 1))``, so the bound follows
    from the Lp maximal inequality with normalizer at most ``k n``.
    """
    cp = ww_constant(p) * math.sqrt(math.log(9.0) / math.log(2.0))
    bound = math.sqrt(f.window) * cp
    ratios, ses = [], []
    for n in n_grid:
        est = ww_norm(f, int(n), p, trials, seed, threads=threads)
        scale = n / math.sqrt(n * math.log(n + 1.0))
        ratios.append(est.value * scale)
        ses.append(est.stderr * scale)
    passed = all(r + 3 * s <= bound for r, s in zip(ratios, ses))
    return Prop63Report(tuple(int(n) for n in n_grid), tuple(ratios), tuple(ses), bound, passed)
