"""Coefficient processes ``X_1, X_2, ...`` and their normalizing quantities.

Families
--------
``rademacher``
    ``X_k = eps_k a_k`` with fair signs and ``a_k = 1`` unless magnitudes are given.
``signed_magnitudes``
    ``X_k = eps_k a_k``; magnitudes are required.
``gaussian_centered``
    ``X_k = a_k (g_k + i g'_k) / sqrt(2)``, a standard complex normal.
``bounded_mds``
    A martingale difference sequence driven by fair signs: ``X_k = eps_k g_k``
    with ``g_1 = c_1`` and ``g_k = c_k (3 + eps_{k-1}) / 4`` for ``k >= 2``,
    where ``c_k = bound * a_k``.  Each ``|X_k| <= c_k`` and
    ``E(X_i | F_k) = 0`` for ``k < i``.
``m_dependent``
    ``X_k = a_k (2 mean(b_k, ..., b_{k+w}) - 1)`` for i.i.d. fair bits ``b``;
    terms more than ``w`` apart are independent.

With ``phase=True`` every value is multiplied by an independent uniform unit
phase, which makes the path complex and keeps all means zero.

Conditional expectations use the natural filtration of the driving signs or
bits: ``F_k`` is generated by ``eps_1..eps_k`` (and phases) or by
``b_1..b_{k+w}`` for the ``m_dependent`` family.  Each ``X_k`` is adapted to
it, and all conditional terms are computed in closed form.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as _gamma

from ._rng import stream

FAMILIES = ("rademacher", "signed_magnitudes", "gaussian_centered", "bounded_mds", "m_dependent")
MODES = ("SYMMETRIC", "CENTERED_INDEP", "BOUNDED", "PMOMENT")


@dataclass(frozen=True)
class ProcessSpec:
    """Description of a coefficient process.

    Parameters
    ----------
    family : str
        One of :data:`FAMILIES`.
    magnitudes : array_like or None
        Scale factors ``a_k >= 0``; ``None`` means all ones.  A finite array is
        extended by its last value when longer paths are requested.
    bound : float
        Sup-norm scale for ``bounded_mds``.
    window : int
        Dependence range ``w`` for ``m_dependent``.
    seed : int
    phase : bool
        Multiply by independent uniform unit phases.
    """

    family: str = "rademacher"
    magnitudes: tuple | None = None
    bound: float = 1.0
    window: int = 0
    seed: int = 0
    phase: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {FAMILIES}")
        if self.magnitudes is not None:
            mags = tuple(float(x) for x in np.asarray(self.magnitudes, dtype=float).reshape(-1))
            if not mags or any(not math.isfinite(x) or x < 0 for x in mags):
                raise ValueError("magnitudes must be finite and nonnegative")
            object.__setattr__(self, "magnitudes", mags)
        elif self.family == "signed_magnitudes":
            raise ValueError("signed_magnitudes needs magnitudes")
        if int(self.window) != self.window or self.window < 0:
            raise ValueError("window must be a nonnegative integer")
        if not (0 < self.bound < math.inf):
            raise ValueError("bound must be positive and finite")

    def mags(self, n):
        """``a_1..a_n`` as an array."""
        if self.magnitudes is None:
            return np.ones(n)
        a = np.asarray(self.magnitudes)
        if a.size >= n:
            return a[:n].copy()
        return np.concatenate([a, np.full(n - a.size, a[-1])])

    @property
    def bounded(self):
        return self.family != "gaussian_centered"

    def sup_norms(self, n):
        """``||X_k||_inf`` for ``k = 1..n``."""
        if not self.bounded:
            return np.full(n, np.inf)
        a = self.mags(n)
        return self.bound * a if self.family == "bounded_mds" else a


@dataclass(frozen=True)
class SamplePath:
    values: np.ndarray
    spec: ProcessSpec
    seed: int
    trial: int | None = None

    @property
    def n(self):
        return self.values.size

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["k", "re", "im"])
        for k, x in enumerate(self.values, 1):
            w.writerow([k, repr(float(x.real)), repr(float(x.imag))])
        return buf.getvalue()


@dataclass(frozen=True)
class RQuantity:
    mode: str
    value: float
    n: int
    m: int
    p: float | None = None


def sample_path(spec, n, seed_override=None, trial=None):
    """Realize ``X_1..X_n``.

    The stream depends only on ``(seed, family, trial)``, so a path is
    reproducible and distinct trials are independent.
    """
    if n < 1:
        raise ValueError("path length must be >= 1")
    seed = spec.seed if seed_override is None else int(seed_override)
    keys = (spec.family,) if trial is None else (spec.family, int(trial))
    rng = stream(seed, *keys)
    a = spec.mags(n)
    fam = spec.family
    if fam in ("rademacher", "signed_magnitudes"):
        x = (2.0 * rng.integers(0, 2, n) - 1.0) * a
    elif fam == "gaussian_centered":
        g = rng.standard_normal((n, 2))
        x = a * (g[:, 0] + 1j * g[:, 1]) / math.sqrt(2.0)
    elif fam == "bounded_mds":
        eps = 2.0 * rng.integers(0, 2, n) - 1.0
        cap = spec.bound * a
        g = cap.copy()
        g[1:] = cap[1:] * (3.0 + eps[:-1]) / 4.0
        x = eps * g
    else:
        w = spec.window
        bits = rng.integers(0, 2, n + w).astype(float)
        c = np.concatenate([[0.0], np.cumsum(bits)])
        x = a * (2.0 * (c[w + 1:w + 1 + n] - c[:n]) / (w + 1) - 1.0)
    x = np.asarray(x, dtype=complex)
    if spec.phase:
        x = x * np.exp(2j * math.pi * rng.random(n))
    x.setflags(write=False)
    return SamplePath(x, spec, seed, trial)


def second_moments(spec, n):
    """``E|X_k|^2`` for ``k = 1..n``."""
    a = spec.mags(n)
    fam = spec.family
    if fam == "bounded_mds":
        cap = spec.bound * a
        out = cap ** 2 * 5.0 / 8.0
        out[0] = cap[0] ** 2
        return out
    if fam == "m_dependent":
        return a ** 2 / (spec.window + 1)
    return a ** 2


def p_norms(spec, n, p):
    """``||X_k||_p`` for ``k = 1..n``."""
    a = spec.mags(n)
    fam = spec.family
    if fam in ("rademacher", "signed_magnitudes"):
        return a.copy()
    if fam == "gaussian_centered":
        return a * _gamma(1.0 + p / 2.0) ** (1.0 / p)
    if fam == "bounded_mds":
        cap = spec.bound * a
        out = cap * ((1.0 + 2.0 ** (-p)) / 2.0) ** (1.0 / p)
        out[0] = cap[0]
        return out
    w = spec.window
    pmf = np.array([math.comb(w + 1, int(i)) for i in range(w + 2)]) / 2.0 ** (w + 1)
    vals = np.abs(2.0 * np.arange(w + 2) / (w + 1) - 1.0)
    return a * float(pmf @ vals ** p) ** (1.0 / p)


def _cross_unit(w, lag, r=None):
    """Norm of ``U V`` for unit magnitudes and ``0 < lag <= w``.

    ``U = 2 mean(b_0..b_w) - 1`` and ``V = E(X_lag | b_0..b_w)``.  Returns the
    sup norm when ``r`` is None, else the ``L_r`` norm.
    """
    if r is None:
        return (w + 1 - lag) / (w + 1)
    bits = ((np.arange(2 ** (w + 1))[:, None] >> np.arange(w + 1)) & 1).astype(float)
    U = 2.0 * bits.mean(axis=1) - 1.0
    V = (2.0 / (w + 1)) * (bits[:, lag:] - 0.5).sum(axis=1)
    return float(np.mean(np.abs(U * V) ** r) ** (1.0 / r))


def cross_terms(spec, n, r=None):
    """Matrix ``C[k, i] = ||X_k E(X_i | F_k)||`` for ``k < i`` (0-based indices).

    Sup norm when ``r`` is None, else the ``L_r`` norm.  Nonzero entries only
    arise for ``m_dependent`` without phases, within the window.
    """
    C = np.zeros((n, n))
    if spec.family == "gaussian_centered" and r is None:
        raise ValueError("sup-norm cross terms need a bounded family")
    if spec.family != "m_dependent" or spec.phase or spec.window == 0:
        return C
    a = spec.mags(n)
    w = spec.window
    for lag in range(1, w + 1):
        v = _cross_unit(w, lag, r)
        k = np.arange(n - lag)
        C[k, k + lag] = a[k] * a[k + lag] * v
    return C


def cross_terms_bruteforce(spec, k, i):
    """``||X_k E(X_i | b_1..b_{k+w})||_inf`` by enumerating every bit atom.

    Indices are 1-based.  Only for the ``m_dependent`` family and small ``k``.
    """
    if spec.family != "m_dependent":
        raise ValueError("brute force is only needed for m_dependent")
    w = spec.window
    a = spec.mags(max(k, i))
    nb = i + w
    known = k + w
    bits = ((np.arange(2 ** nb)[:, None] >> np.arange(nb)) & 1).astype(float)
    X = lambda j: a[j - 1] * (2.0 * bits[:, j - 1:j + w].mean(axis=1) - 1.0)
    Xi, Xk = X(i), X(k)
    codes = (bits[:, :known] * (2 ** np.arange(known))).sum(axis=1).astype(np.int64)
    sums = np.bincount(codes, weights=Xi, minlength=2 ** known)
    cnts = np.bincount(codes, minlength=2 ** known)
    cond = (sums / np.maximum(cnts, 1))[codes]
    return float(np.max(np.abs(Xk * cond)))


def r_quantity(spec, path, n, m, mode, p=None):
    """Normalizer ``R_{n,m}`` in one of four modes.

    ``SYMMETRIC``
        ``sum_{n<k<=m} |X_k|^2``.
    ``CENTERED_INDEP``
        ``sum_{n<k<=m} (|X_k|^2 + E|X_k|^2)``.
    ``BOUNDED``
        ``sum_{n<i<=m} ||X_i||_inf^2 + sum_{n+1<i<=m} sum_{k<i} ||X_k E(X_i|F_k)||_inf``.
    ``PMOMENT``
        As ``BOUNDED`` with ``||X_i||_p^2`` and ``L_{p/2}`` norms of the cross terms.
    """
    if not 0 <= n < m <= path.n:
        raise ValueError(f"need 0 <= n < m <= {path.n}, got n={n}, m={m}")
    x = np.asarray(path.values)[n:m]
    fam = spec.family
    if mode == "SYMMETRIC":
        if fam in ("bounded_mds", "m_dependent"):
            raise ValueError(f"SYMMETRIC mode needs an independent family, not {fam}")
        return RQuantity(mode, float(np.sum(np.abs(x) ** 2)), n, m)
    if mode == "CENTERED_INDEP":
        if fam in ("bounded_mds", "m_dependent"):
            raise ValueError(f"CENTERED_INDEP mode needs an independent family, not {fam}")
        val = float(np.sum(np.abs(x) ** 2) + np.sum(second_moments(spec, m)[n:]))
        return RQuantity(mode, val, n, m)
    if mode == "BOUNDED":
        if not spec.bounded:
            raise ValueError("BOUNDED mode needs a bounded family")
        diag = float(np.sum(spec.sup_norms(m)[n:] ** 2))
        C = cross_terms(spec, m)
        return RQuantity(mode, diag + float(C[:, n + 1:].sum()), n, m)
    if mode == "PMOMENT":
        if p is None or p < 2:
            raise ValueError("PMOMENT mode needs p >= 2")
        diag = float(np.sum(p_norms(spec, m, p)[n:] ** 2))
        C = cross_terms(spec, m, r=p / 2.0)
        return RQuantity(mode, diag + float(C[:, n + 1:].sum()), n, m, p)
    raise ValueError(f"unknown mode {mode!r}")


def correlation_alpha(spec, i):
    """``alpha_i = sum_{k<=i} ||X_k E(X_i | F_k)||_inf`` (1-based ``i``)."""
    if i < 1:
        raise ValueError("i must be >= 1")
    if not spec.bounded:
        raise ValueError("correlation profile needs a bounded family")
    return float(spec.sup_norms(i)[-1] ** 2 + cross_terms(spec, i)[:, i - 1].sum())


def correlation_profile(spec, n):
    """``alpha_1..alpha_n`` as an array."""
    if not spec.bounded:
        raise ValueError("correlation profile needs a bounded family")
    return spec.sup_norms(n) ** 2 + cross_terms(spec, n).sum(axis=0)
