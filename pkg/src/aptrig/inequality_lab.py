"""Explicit constants, right-hand sides and Monte Carlo checks of maximal inequalities.

Every check follows the same pattern: draw ``trials`` independent coefficient
paths, compute a statistic per path from certified suprema (always the upper
end of the bracket, so the estimate is conservative), and compare the sample
mean with an analytic right-hand side.  A check passes when
``lhs + 3 * stderr <= rhs``.

Bound identifiers
-----------------
``THM31_ORLICZ``
    ``E max_l exp(eps max_t |S_{n,l}|^2 / R_{n,m}) <= 3 nu(K) sigma_m / rho1``
    with ``eps = rho2^2 / (6400 e fmax^2)`` and ``R`` the bounded normalizer.
``THM31_LP``
    ``|| max_l max_t |S_{n,l}| ||_p <= C_p sqrt(R_{n,m} log(sigma_m + 1))``.
``COR32``
    ``|| max_l max_t |S_{n,l}| ||_p <= 2 C_p sqrt(log(sigma_m + 1)) (sum ||X_k||_p^p)^{1/p}``
    for ``1 < p <= 2`` and independent coefficients.
``COR33``
    As ``COR32`` with ``log(m^s prod(|lam^i|* + 1) + 1)``; the unnamed
    constant is made explicit as ``2 C_p sqrt(1 + s log(6s) / log 2)``.
``THM34``
    ``|| max_l max_t |S_{n,l}| ||_p <= C_p (nu(K) sigma_m)^{1/p} sqrt(R^(p))``
    for ``p > 2``; ``p = 2`` uses ``C_2 log(4m)`` instead.
``COR37_SUP``
    Supremum over a finite set of ``(n, m, T)`` of
    ``exp(eps |S_{n,m}|^2 / (log(C_s T^s m^s prod + 1) sum |X_k|^2))``.
``THM38``
    Same supremum with ``(sum |X_k|^p + ||X_k||_p^p)^{2/p}`` in place of
    ``sum |X_k|^2``, for ``1 < p <= 2``.

Frequencies enter through the exponential system on ``[-T, T]^s`` with
``rho1 = 1``, ``rho2 = 1/2`` and ``nu(K) = (2T)^s``.
"""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._rng import map_trials, stream
from .expsum import Box, ExpSum, certified_sup, running_partial_max
from .random_processes import p_norms, r_quantity, sample_path
from .sigma_systems import is_monotone, sigma_exponential

BOUND_IDS = ("THM31_ORLICZ", "THM31_LP", "COR32", "COR33", "THM34", "COR37_SUP", "THM38")
E = math.e


def lemma24_bound(C1, C2, delta):
    """``1 + C1 / (1 - e delta C2)`` for ``delta < 1 / (e C2)``.

    >>> lemma24_bound(1.0, 1.0, 1 / (2 * math.e))
    3.0
    """
    if C1 < 0 or C2 < 0:
        raise ValueError("C1 and C2 must be nonnegative")
    if C2 > 0 and not delta < 1.0 / (E * C2):
        raise ValueError("delta must be below 1/(e C2)")
    return 1.0 + C1 / (1.0 - E * delta * C2)


def dedecker_rhs(sq_norms, cross, p, complex_valued=False):
    """``sqrt(2p) (sum ||X_i^2||_{p/2} + sum cross)^{1/2}``, doubled for complex values.

    Parameters
    ----------
    sq_norms : array_like
        ``||X_i^2||_{p/2} = ||X_i||_p^2`` per index.
    cross : array_like or float
        Cross terms ``||X_k E(X_i | F_k)||_{p/2}`` (any shape, summed).
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    sq = np.asarray(sq_norms, dtype=float)
    cr = np.asarray(cross, dtype=float)
    if np.any(sq < 0) or np.any(cr < 0):
        raise ValueError("moment inputs must be nonnegative")
    val = math.sqrt(2.0 * p) * math.sqrt(float(sq.sum() + cr.sum()))
    return 2.0 * val if complex_valued else val


def moricz_constant(C, p, q):
    """``C (1 - 2^{-(q-1)/p})^{-p}``; for ``q <= 1`` use :func:`moricz_log_bound`."""
    if q <= 1:
        raise ValueError("q must exceed 1; for q = 1 use moricz_log_bound")
    if p <= 1 or C < 0:
        raise ValueError("need p > 1 and C >= 0")
    return C * (-math.expm1(-(q - 1) / p * math.log(2.0))) ** (-p)


def moricz_log_bound(C, p, m, alpha_sum):
    """``C (2 + log2 m)^p alpha_sum``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return C * (2.0 + math.log2(m)) ** p * alpha_sum


@dataclass(frozen=True)
class MoriczCheck:
    length: int
    p: float
    q: float
    C: float
    worst_ratio: float
    holds: bool


def moricz_exact(atoms, probs, p, q, alpha=None):
    """Check a Móricz-type maximal bound exactly on a finite probability space.

    ``atoms`` has shape (N, L): row ``w`` is the realization ``X_1..X_L`` on
    atom ``w`` with probability ``probs[w]``.  The hypothesis constant ``C`` is
    the smallest one valid for every block, ``max E|S_{j,l}|^p / (sum alpha)^q``.
    For ``q > 1`` the conclusion uses :func:`moricz_constant`, for ``q = 1``
    :func:`moricz_log_bound`.  ``worst_ratio`` is the largest
    ``lhs / rhs`` over all ``0 <= n < m <= L``.
    """
    X = np.asarray(atoms)
    w = np.asarray(probs, dtype=float)
    L = X.shape[1]
    alpha = np.ones(L) if alpha is None else np.asarray(alpha, dtype=float)
    S = np.concatenate([np.zeros((X.shape[0], 1)), np.cumsum(X, axis=1)], axis=1)
    A = np.concatenate([[0.0], np.cumsum(alpha)])
    C = 0.0
    for j in range(L):
        for l in range(j + 1, L + 1):
            if A[l] > A[j]:
                C = max(C, float(w @ np.abs(S[:, l] - S[:, j]) ** p) / (A[l] - A[j]) ** q)
    worst = 0.0
    for n in range(L):
        for m in range(n + 1, L + 1):
            lhs = float(w @ np.abs(S[:, n + 1:m + 1] - S[:, [n]]).max(axis=1) ** p)
            a = A[m] - A[n]
            rhs = moricz_constant(C, p, q) * a ** q if q > 1 else moricz_log_bound(C, p, m, a)
            if lhs > 0:
                worst = max(worst, lhs / rhs if rhs > 0 else math.inf)
    return MoriczCheck(L, p, q, float(C), float(worst), bool(worst <= 1.0 + 1e-12))


def moricz_exhaustive(length, p, q, signs=None):
    """Exact check over all ``2^length`` equally likely sign atoms.

    ``X_k = c_k eps_k`` with fair independent signs ``eps`` and a fixed sign
    sequence ``c`` (default all ones); ``alpha_k = 1``.
    """
    atoms = np.array(list(itertools.product((-1.0, 1.0), repeat=length)))
    if signs is not None:
        atoms = atoms * np.asarray(signs, dtype=float)
    probs = np.full(atoms.shape[0], 1.0 / atoms.shape[0])
    return moricz_exact(atoms, probs, p, q)


@dataclass(frozen=True)
class ConstantsReport:
    epsilon: float
    c_p: float
    orlicz_rhs: float
    rho1: float
    rho2: float
    nu_K: float
    sigma_m: float
    fmax: float
    p: float


def thm31_constants(rho1, rho2, nu_K, sigma_m, fmax=1.0, p=2.0):
    """``eps``, ``C_p`` and the Orlicz right-hand side ``3 nu(K) sigma_m / rho1``.

    >>> r = thm31_constants(1.0, 0.5, 2 * math.pi, 660.0)
    >>> round(r.orlicz_rhs / math.pi, 9)
    3960.0
    """
    if not (rho1 > 0 and 0 < rho2 < 1 and fmax > 0 and sigma_m >= 1 and nu_K > 0):
        raise ValueError("need rho1 > 0, 0 < rho2 < 1, fmax > 0, nu_K > 0, sigma_m >= 1")
    eps = rho2 ** 2 / (6400.0 * E * fmax ** 2)
    cp = math.sqrt((1.0 + 2.0 * math.log(math.exp(p / 2.0) + 3.0 * nu_K / rho1)) / eps)
    return ConstantsReport(eps, cp, 3.0 * nu_K * sigma_m / rho1, rho1, rho2, nu_K,
                           sigma_m, fmax, p)


def thm34_constant(p, rho1=1.0, rho2=0.5):
    """``C_p`` for ``p > 2``; for ``p = 2`` the pair ``(C_2, alternative)``.

    The ``p = 2`` constant is ``4 / (sqrt(rho1) rho2 log 2)``; the alternative
    grouping ``4 / (sqrt(rho1 rho2) log 2)`` is returned second.
    """
    if p == 2:
        return (4.0 / (math.sqrt(rho1) * rho2 * math.log(2.0)),
                4.0 / (math.sqrt(rho1 * rho2) * math.log(2.0)))
    if p <= 2:
        raise ValueError("p must be >= 2")
    return (2.0 * math.sqrt(2.0 * p) / (rho1 ** (1.0 / p) * rho2)
            / (1.0 - 2.0 ** ((1.0 - p / 2.0) / p)))


@dataclass(frozen=True)
class BoundReport:
    bound_id: str
    lhs: float
    stderr: float
    rhs: float
    trials: int
    seed: int
    passed: bool
    truncation: str = ""
    details: dict = field(default_factory=dict)

    @property
    def margin(self):
        return self.rhs / self.lhs if self.lhs > 0 else math.inf

    FIELDS = ("bound_id", "lhs", "stderr", "rhs", "margin", "trials", "seed", "passed", "truncation")

    def row(self):
        return [self.bound_id, repr(self.lhs), repr(self.stderr), repr(self.rhs),
                repr(self.margin), self.trials, self.seed, int(self.passed), self.truncation]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.FIELDS)
        w.writerow(self.row())
        return buf.getvalue()

    def to_text(self):
        d = asdict(self)
        d["margin"] = self.margin
        det = d.pop("details")
        lines = [f"{k} = {d[k]!r}" for k in self.FIELDS]
        lines += [f"details.{k} = {det[k]!r}" for k in sorted(det)]
        return "\n".join(lines) + "\n"


def _mean_se(x):
    x = np.asarray(x, dtype=float)
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
    return float(x.mean()), se


def _lp_from_moments(vals, p):
    """``(E V^p)^{1/p}`` with a delta-method standard error."""
    mu, se = _mean_se(np.asarray(vals) ** p)
    if mu == 0:
        return 0.0, 0.0
    return mu ** (1.0 / p), se * mu ** (1.0 / p - 1.0) / p


_INDEPENDENT = ("rademacher", "signed_magnitudes", "gaussian_centered")
_SYMMETRIC = ("rademacher", "signed_magnitudes", "gaussian_centered")


def _sigma(freqs, m, monotone):
    s = freqs.shape[1]
    if monotone is None:
        monotone = is_monotone(freqs[:m])
    return sigma_exponential(s, freqs, m, monotone), monotone


def default_truncation(m_max, T_values=(1.0, 2.0, 4.0)):
    """``(n, m, T)`` triples: ``m`` runs over powers of two up to ``m_max``, ``n`` over ``{0, m/2}``."""
    ms = []
    m = 1
    while m <= m_max:
        ms.append(m)
        m *= 2
    if ms[-1] != m_max:
        ms.append(m_max)
    out = []
    for m in ms:
        for n in sorted({0, m // 2}):
            if n < m:
                for T in T_values:
                    out.append((n, m, float(T)))
    return tuple(out)


def check_bound(bound_id, process, freqs, n, m, box, p=None, trials=1000, seed=0,
                threads=1, tol=1e-9, rtol=1e-4, monotone=None, truncation=None):
    """Monte Carlo check of one inequality.

    Parameters
    ----------
    bound_id : str
        One of :data:`BOUND_IDS`.
    process : ProcessSpec
    freqs : array_like, shape (>= m, s)
    n, m : int
        Block ``n < k <= m``.  For ``COR37_SUP`` and ``THM38`` ``m`` is the
        largest index used by the default truncation.
    box : Box
        ``[-T, T]^s`` (ignored by the supremum bounds, which take ``T`` from
        the truncation).
    p : float, optional
        Moment order where the bound has one.
    trials, seed, threads : int
        Monte Carlo size, base seed, worker threads (results do not depend on
        ``threads``).
    tol, rtol : float
        Certified supremum tolerances.
    monotone : bool or None
        Use the monotone ``sigma`` formula; ``None`` decides from the data.
    truncation : sequence of (n, m, T), optional
        Finite index set for the supremum bounds.
    """
    if bound_id not in BOUND_IDS:
        raise ValueError(f"unknown bound id {bound_id!r}; choose from {BOUND_IDS}")
    lam = np.asarray(freqs, dtype=float)
    if lam.ndim == 1:
        lam = lam[:, None]
    s = lam.shape[1]
    if bound_id in ("COR37_SUP", "THM38"):
        return _check_sup(bound_id, process, lam, m, p, trials, seed, threads, tol, rtol, truncation)
    if not 0 <= n < m <= lam.shape[0]:
        raise ValueError(f"need 0 <= n < m <= {lam.shape[0]}")
    if box.dim != s:
        raise ValueError("box dimension does not match frequencies")
    box.require_unit()
    T = box.half_width
    fam = process.family
    nu = box.volume
    rho1, rho2 = 1.0, 0.5
    details = {}
    if bound_id == "COR33":
        sig = sigma_exponential(s, lam, m, False)
        details["monotone"] = False
    else:
        sig, mono = _sigma(lam, m, monotone)
        details["monotone"] = mono
    details["sigma_m"] = sig
    if bound_id in ("THM31_ORLICZ", "THM31_LP"):
        if not process.bounded:
            raise ValueError(f"{bound_id} needs a bounded family")
        if bound_id == "THM31_LP" and (p is None or p < 1):
            raise ValueError("THM31_LP needs p >= 1")
    if bound_id in ("COR32", "COR33"):
        if fam not in _INDEPENDENT:
            raise ValueError(f"{bound_id} needs independent coefficients")
        if p is None or not 1 < p <= 2:
            raise ValueError(f"{bound_id} needs 1 < p <= 2")
    if bound_id == "THM34" and (p is None or p < 2):
        raise ValueError("THM34 needs p >= 2")
    const = thm31_constants(rho1, rho2, nu, sig, 1.0, p if p is not None else 2.0)
    details["epsilon"] = const.epsilon

    def stat(i):
        path = sample_path(process, m, trial=i, seed_override=seed)
        P = ExpSum(path.values[n:m], lam[n:m], s)
        if bound_id == "THM31_ORLICZ":
            R = r_quantity(process, path, n, m, "BOUNDED").value
            if R == 0:
                return 1.0
        M = running_partial_max(P, m - n, box, tol, rtol=rtol).upper if np.any(P.coeffs) else 0.0
        if bound_id == "THM31_ORLICZ":
            return math.exp(const.epsilon * M * M / R)
        return M

    vals = map_trials(stat, trials, threads)
    if bound_id == "THM31_ORLICZ":
        lhs, se = _mean_se(vals)
        rhs = const.orlicz_rhs
    else:
        lhs, se = _lp_from_moments(vals, p)
        if bound_id == "THM31_LP":
            R = r_quantity(process, sample_path(process, m, seed_override=seed), n, m, "BOUNDED").value
            rhs = const.c_p * math.sqrt(R * math.log(sig + 1.0))
            details["c_p"] = const.c_p
        elif bound_id in ("COR32", "COR33"):
            moment = float(np.sum(p_norms(process, m, p)[n:] ** p)) ** (1.0 / p)
            scale = 2.0 * const.c_p
            if bound_id == "COR33":
                scale *= math.sqrt(1.0 + s * math.log(6.0 * s) / math.log(2.0))
                logterm = math.log(sigma_exponential(s, lam, m, False) / (6 * s) ** s + 1.0)
            else:
                logterm = math.log(sig + 1.0)
            rhs = scale * math.sqrt(logterm) * moment
            details["constant"] = scale
        else:
            Rp = r_quantity(process, sample_path(process, m, seed_override=seed), n, m,
                            "PMOMENT", p=p).value
            if p == 2:
                c2, alt = thm34_constant(2.0, rho1, rho2)
                rhs = c2 * math.log(4.0 * m) * math.sqrt(nu * sig * Rp)
                details["c_2"] = c2
                details["c_2_alternative"] = alt
                details["rhs_alternative"] = alt * math.log(4.0 * m) * math.sqrt(nu * sig * Rp)
            else:
                cp = thm34_constant(p, rho1, rho2)
                rhs = cp * (nu * sig) ** (1.0 / p) * math.sqrt(Rp)
                details["c_p"] = cp
    passed = lhs + 3.0 * se <= rhs
    return BoundReport(bound_id, lhs, se, rhs, trials, seed, passed,
                       f"n={n};m={m};T={T!r}", details)


def _check_sup(bound_id, process, lam, m_max, p, trials, seed, threads, tol, rtol, truncation):
    s = lam.shape[1]
    fam = process.family
    if bound_id == "COR37_SUP" and fam not in _SYMMETRIC:
        raise ValueError("COR37_SUP needs symmetric independent coefficients")
    if bound_id == "THM38":
        if fam not in _INDEPENDENT:
            raise ValueError("THM38 needs independent coefficients")
        if p is None or not 1 < p <= 2:
            raise ValueError("THM38 needs 1 < p <= 2")
    trunc = tuple(truncation) if truncation is not None else default_truncation(m_max)
    for (n, m, T) in trunc:
        if not (0 <= n < m <= lam.shape[0]) or T < 1:
            raise ValueError(f"bad truncation entry {(n, m, T)}")
    M_top = max(m for _, m, _ in trunc)
    rho1, rho2 = 1.0, 0.5
    eps = rho2 ** 2 / (6400.0 * E)
    q = 1.0
    gamma = {}
    tail = 0.0
    for (n, m, T) in trunc:
        sig = sigma_exponential(s, lam, m, False)
        gamma[(n, m, T)] = (2.0 * T) ** s * sig  # equals (12s)^s T^s m^s prod(...)
        tail += (3.0 / rho1) * gamma[(n, m, T)] ** (-2.0 * q)
    rhs = math.exp(2.0 * q + 1.0) * (1.0 + tail)
    details = {"epsilon": eps, "q": q, "cells": len(trunc)}
    if bound_id == "THM38":
        eps = eps / 2.0 ** (2.0 * (p - 1.0) / p)
        rhs *= math.exp((2.0 - p) / (2.0 * (p - 1.0)))
        details["epsilon"] = eps
        pn = p_norms(process, M_top, p) ** p

    def stat(i):
        path = sample_path(process, M_top, trial=i, seed_override=seed)
        x = np.asarray(path.values)
        best = 0.0
        for (n, m, T) in trunc:
            if bound_id == "COR37_SUP":
                norm = float(np.sum(np.abs(x[n:m]) ** 2))
            else:
                norm = float(np.sum(np.abs(x[n:m]) ** p) + np.sum(pn[n:m])) ** (2.0 / p)
            if norm == 0:
                best = max(best, 0.0)
                continue
            P = ExpSum(x[n:m], lam[n:m], s)
            M = certified_sup(P, Box(T, s), tol, rtol=rtol).upper
            best = max(best, eps * M * M / (math.log(gamma[(n, m, T)] + 1.0) * norm))
        return math.exp(best)

    vals = map_trials(stat, trials, threads)
    lhs, se = _mean_se(vals)
    label = ";".join(f"({n},{m},{T!r})" for n, m, T in trunc)
    return BoundReport(bound_id, lhs, se, rhs, trials, seed, lhs + 3.0 * se <= rhs, label, details)


@dataclass(frozen=True)
class GrowthRow:
    n: int
    mean_max: float
    stderr: float
    ratio: float
    ratio_stderr: float


def salem_zygmund_growth(n_grid, trials=200, seed=0, threads=1, rtol=1e-3, magnitudes=None):
    """``E max_t |sum_{k<=n} eps_k a_k e^{ikt}| / sqrt(n log n)`` for each ``n``.

    Uses Rademacher signs, ``a_k = 1`` unless ``magnitudes`` is given, and the
    certified upper end of each supremum.
    """
    ns = [int(v) for v in n_grid]
    if any(v < 2 for v in ns) or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n_grid must be increasing with n >= 2")
    rows = []
    box = Box(math.pi, 1)
    for n in ns:
        lam = np.arange(1, n + 1, dtype=float)[:, None]
        a = np.ones(n) if magnitudes is None else np.asarray(magnitudes, dtype=float)[:n]

        def one(i, n=n, lam=lam, a=a):
            eps = 2.0 * stream(seed, "salem-zygmund", n, i).integers(0, 2, n) - 1.0
            return certified_sup(ExpSum(eps * a, lam, 1), box, 1e-9, rtol=rtol).upper

        mu, se = _mean_se(map_trials(one, trials, threads))
        norm = math.sqrt(n * math.log(n))
        rows.append(GrowthRow(n, mu, se, mu / norm, se / norm))
    return rows
