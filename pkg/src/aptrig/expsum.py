"""Exponential sums ``P(t) = sum_k a_k exp(i <lam_k, t>)`` and certified suprema.

The central object is :class:`ExpSum`.  Suprema over boxes ``[-T, T]^s`` are
computed as two-sided brackets (:class:`CertifiedBound`) by a branch-and-bound
search, see :mod:`aptrig._certify` for the cell bounds.

Examples
--------
>>> import numpy as np
>>> P = ExpSum([1, 1j], [[1.0], [2.0]])
>>> complex(evaluate(P, [0.0]))
(1+1j)
>>> b = certified_sup(ExpSum([2.0], [[3.0]]), Box(1.0, 1), tol=1e-6)
>>> b.lower <= 2.0 <= b.upper
True
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _certify

__all__ = [
    "ExpSum", "Box", "CertifiedBound", "Rectangle", "evaluate", "evaluate_prefixes",
    "gradient_bound", "lemma21_bound", "lemma21_check", "certified_sup",
    "running_partial_max", "witness_rectangle", "witness_check", "dumps", "loads",
]


def _frozen(x):
    x = np.array(x)
    x.setflags(write=False)
    return x


@dataclass(frozen=True)
class ExpSum:
    """Finite exponential sum with complex coefficients and real frequency vectors.

    Parameters
    ----------
    coeffs : array_like, shape (n,)
        Complex coefficients ``a_k``.
    freqs : array_like, shape (n, s) or (n,)
        Frequency vectors ``lam_k``.  A 1-d array is read as ``s = 1``.
    dim : int, optional
        Needed only when ``n = 0``.
    """

    coeffs: np.ndarray
    freqs: np.ndarray
    dim: int = field(default=0)

    def __init__(self, coeffs, freqs, dim=None):
        a = np.asarray(coeffs, dtype=complex).reshape(-1)
        lam = np.asarray(freqs, dtype=float)
        if lam.ndim == 1:
            lam = lam.reshape(-1, 1) if lam.size == a.size else lam.reshape(a.size, -1)
        if lam.ndim != 2:
            raise ValueError("freqs must be a (n, s) array")
        if a.size == 0 and dim is not None:
            lam = lam.reshape(0, dim)
        if lam.shape[0] != a.size:
            raise ValueError(f"{a.size} coefficients but {lam.shape[0]} frequency vectors")
        s = lam.shape[1] if dim is None else int(dim)
        if lam.shape[1] != s or s < 1:
            raise ValueError(f"frequency vectors must have {s} >= 1 components")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(lam))):
            raise ValueError("coefficients and frequencies must be finite")
        object.__setattr__(self, "coeffs", _frozen(a))
        object.__setattr__(self, "freqs", _frozen(lam))
        object.__setattr__(self, "dim", s)

    @property
    def n(self):
        return self.coeffs.size

    def prefix(self, m):
        """The partial sum ``P_m`` (first ``m`` terms)."""
        return ExpSum(self.coeffs[:m], self.freqs[:m], self.dim)

    def block(self, n, m):
        """The block ``sum_{n < k <= m}``."""
        return ExpSum(self.coeffs[n:m], self.freqs[n:m], self.dim)

    def scaled(self, c):
        return ExpSum(c * self.coeffs, self.freqs, self.dim)

    def __eq__(self, other):
        return (isinstance(other, ExpSum) and self.dim == other.dim
                and np.array_equal(self.coeffs, other.coeffs)
                and np.array_equal(self.freqs, other.freqs))

    __hash__ = None


@dataclass(frozen=True)
class Box:
    """The cube ``[-T, T]^s``."""

    half_width: float
    dim: int

    def __post_init__(self):
        if not (self.half_width > 0 and math.isfinite(self.half_width)):
            raise ValueError("box half-width must be positive and finite")
        if self.dim < 1:
            raise ValueError("box dimension must be >= 1")

    def require_unit(self):
        if self.half_width < 1:
            raise ValueError(f"this bound needs T >= 1, got T = {self.half_width}")

    @property
    def volume(self):
        return (2.0 * self.half_width) ** self.dim


@dataclass(frozen=True)
class CertifiedBound:
    """Bracket ``lower <= sup <= upper``.

    ``status`` is ``"ok"`` when ``upper - lower <= tol`` (or the relative
    tolerance) was reached and ``"budget_exceeded"`` otherwise.  ``argmax`` is
    the point realizing ``lower`` and ``n0`` the length of the partial sum that
    realizes it (for running maxima).
    """

    lower: float
    upper: float
    tol: float
    status: str = "ok"
    argmax: np.ndarray | None = None
    n0: int = 0
    evaluations: int = 0

    @property
    def width(self):
        return self.upper - self.lower

    @property
    def ok(self):
        return self.status == "ok"

    def contains(self, x, slack=0.0):
        return self.lower - slack <= x <= self.upper + slack


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned rectangle ``prod [u_i - h_i, u_i + h_i]`` inside a box.

    ``half_widths`` may be infinite on axes where every frequency vanishes.
    """

    center: np.ndarray
    half_widths: np.ndarray
    box: Box
    area_bound: float
    M: float = 0.0
    n0: int = 0

    @property
    def lo(self):
        return np.maximum(self.center - self.half_widths, -self.box.half_width)

    @property
    def hi(self):
        return np.minimum(self.center + self.half_widths, self.box.half_width)

    @property
    def area(self):
        return float(np.prod(self.hi - self.lo))


def _check_dim(P, box):
    if box.dim != P.dim:
        raise ValueError(f"box has dimension {box.dim}, sum has dimension {P.dim}")


def evaluate(P, t):
    """Value of ``P`` at one point (shape (s,)) or many points (shape (N, s))."""
    t = np.asarray(t, dtype=float)
    single = t.ndim <= 1
    pts = np.atleast_2d(t.reshape(1, -1) if single else t)
    if pts.shape[1] != P.dim:
        raise ValueError(f"point has dimension {pts.shape[1]}, sum has dimension {P.dim}")
    vals = np.exp(1j * (pts @ P.freqs.T)) @ P.coeffs
    return vals[0] if single else vals


def evaluate_prefixes(P, t):
    """All partial sums at points ``t``: array of shape (N, n), column ``k`` is ``P_{k+1}``."""
    pts = np.atleast_2d(np.asarray(t, dtype=float))
    if pts.shape[1] != P.dim:
        raise ValueError(f"point has dimension {pts.shape[1]}, sum has dimension {P.dim}")
    return np.cumsum(np.exp(1j * (pts @ P.freqs.T)) * P.coeffs, axis=1)


def gradient_bound(P):
    """Lipschitz constants ``L_i = sum_k |a_k| |lam_k^i|`` per axis."""
    return np.abs(P.coeffs) @ np.abs(P.freqs)


def certified_sup(P, box, tol=1e-6, *, rtol=0.0, max_evals=10**6):
    """Certified bracket for ``sup_{t in box} |P(t)|``.

    Parameters
    ----------
    P : ExpSum
    box : Box
    tol : float
        Absolute target width, must be positive.
    rtol : float, optional
        Relative target width; the search stops at width ``max(tol, rtol*lower)``.
    max_evals : int, optional
        Cell-evaluation budget.  When exhausted the best bracket so far is
        returned with ``status == "budget_exceeded"``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_dim(P, box)
    r = _certify.run(P.coeffs, P.freqs, box.half_width, tol, rtol, max_evals, prefix=False)
    return CertifiedBound(r.lower, r.upper, tol, r.status, r.argmax, r.n0, r.evaluations)


def running_partial_max(P, m, box, tol=1e-6, *, rtol=0.0, max_evals=10**6):
    """Certified bracket for ``max_{1 <= n' <= m} sup_box |P_{n'}|``."""
    if not 1 <= m <= P.n:
        raise ValueError(f"need 1 <= m <= n = {P.n}, got m = {m}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_dim(P, box)
    Q = P.prefix(m)
    r = _certify.run(Q.coeffs, Q.freqs, box.half_width, tol, rtol, max_evals, prefix=True)
    return CertifiedBound(r.lower, r.upper, tol, r.status, r.argmax, r.n0, r.evaluations)


def _check_monotone(P, m):
    lam = P.freqs[:m]
    if P.dim != 1 or np.any(lam[:, 0] <= 0) or np.any(np.diff(lam[:, 0]) < 0):
        raise ValueError("monotone case needs s = 1 and positive nondecreasing frequencies")


def lemma21_bound(P, m, box, monotone=False, tol=1e-6):
    """Upper bound on ``max_{n' <= m} sup_box |dP_{n'}/dt_i|`` for every axis ``i``.

    Returns ``3 m max_{k<=m} |lam_k| M`` (``2 lam_m M`` in the monotone case)
    with ``M`` the certified upper end of the running partial maximum.  For
    ``s > 1`` the largest of the per-axis values is returned.
    """
    if not 1 <= m <= P.n:
        raise ValueError(f"need 1 <= m <= n = {P.n}, got m = {m}")
    if monotone:
        _check_monotone(P, m)
    lam = np.abs(P.freqs[:m]).max(axis=0)
    if not np.any(lam):
        return 0.0
    M = running_partial_max(P, m, box, tol).upper
    if monotone:
        return float(2.0 * P.freqs[m - 1, 0] * M)
    return float(3.0 * m * lam.max() * M)


def lemma21_check(P, m, box, monotone=False, tol=1e-6, n_points=10**5):
    """Compare :func:`lemma21_bound` with derivatives of all prefixes on a grid.

    Returns ``(sampled_max, bound)``; the inequality holds when
    ``sampled_max <= bound``.
    """
    bound = lemma21_bound(P, m, box, monotone, tol)
    Q = P.prefix(m)
    T = box.half_width
    per_axis = max(2, int(round(n_points ** (1.0 / P.dim))))
    ax = np.linspace(-T, T, per_axis)
    pts = np.stack(np.meshgrid(*[ax] * P.dim, indexing="ij"), -1).reshape(-1, P.dim)
    best = 0.0
    step = max(1, (1 << 20) // max(1, m))
    for a in range(0, pts.shape[0], step):
        E = np.exp(1j * (pts[a:a + step] @ Q.freqs.T)) * Q.coeffs
        for i in range(P.dim):
            d = np.cumsum(E * (1j * Q.freqs[:, i]), axis=1)
            best = max(best, float(np.abs(d).max()))
    return best, bound


def witness_rectangle(P, m, box, tol=1e-3, monotone=False):
    """Rectangle around an approximate maximizer of the running partial maximum.

    Half-widths are ``min(1/(6 s m |lam^i|*), T)`` with ``|lam^i|* =
    max_{k<=m} |lam_k^i|`` (``1/(4 s lam_m)`` in the monotone case).  Axes on
    which every frequency vanishes get an infinite half-width, so the clipped
    rectangle spans the whole axis.

    The maximizer is located with relative tolerance ``tol`` so that the
    sampled half-maximum check of :func:`witness_check` holds with
    ``(1/2 - tol) M``.
    """
    _check_dim(P, box)
    if monotone:
        _check_monotone(P, m)
    s, T = P.dim, box.half_width
    bnd = running_partial_max(P, m, box, tol=1e-12 + tol * 1e-3, rtol=tol)
    lam = np.abs(P.freqs[:m]).max(axis=0)
    with np.errstate(divide="ignore"):
        if monotone:
            h = 1.0 / (4.0 * s * P.freqs[m - 1])
        else:
            h = 1.0 / (6.0 * s * m * lam)
    h = np.where(lam > 0, np.minimum(h, T), np.inf)
    safe = np.where(lam > 0, lam, 1.0)
    side = 1.0 / (4.0 * s * safe) if monotone else 1.0 / (6.0 * s * m * safe)
    area_bound = float(np.prod(np.where(lam > 0, np.minimum(side, T), T)))
    return Rectangle(np.asarray(bnd.argmax, dtype=float), h, box, area_bound, bnd.upper, bnd.n0)


def witness_check(P, m, rect, n_samples=200, rng=None):
    """Smallest ratio ``max_{n'<=m} |P_{n'}(t)| / M`` over points sampled in ``rect``."""
    rng = np.random.default_rng(rng)
    u = rng.uniform(rect.lo, rect.hi, size=(n_samples, P.dim))
    if rect.M == 0:
        return 1.0
    vals = np.abs(evaluate_prefixes(P.prefix(m), u)).max(axis=1)
    return float(vals.min() / rect.M)


def dumps(P):
    """Text record: ``s`` on the first line, then ``Re Im lam^1 .. lam^s`` per term."""
    buf = io.StringIO()
    buf.write(f"{P.dim}\n")
    for a, lam in zip(P.coeffs, P.freqs):
        buf.write(" ".join(repr(float(x)) for x in (a.real, a.imag, *lam)) + "\n")
    return buf.getvalue()


def loads(text):
    """Inverse of :func:`dumps`.  Blank lines and ``#`` comments are ignored."""
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines:
        raise ValueError("empty exponential-sum record")
    try:
        s = int(lines[0])
        rows = [[float(x) for x in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed exponential-sum record: {exc}") from None
    if s < 1 or any(len(r) != s + 2 for r in rows):
        raise ValueError(f"each row needs {s + 2} numbers")
    arr = np.array(rows, dtype=float).reshape(-1, s + 2)
    return ExpSum(arr[:, 0] + 1j * arr[:, 1], arr[:, 2:], s)
