"""Block schedules, series convergence conditions and uniform-convergence diagnostics.

The almost-everywhere convergence results rest on two block decompositions
of the index set driven by a weight sequence ``A_n``:

* :func:`kappa_blocks` groups indices so that ``A_m (log m)^p`` grows by at
  most a factor ``e`` across a block;
* :func:`dyadic_blocks` groups indices on which ``A_m`` stays in one dyadic
  range ``[2^l, 2^{l+1})``.

:func:`series_condition` evaluates the numerical series whose convergence
implies a.e. uniform convergence, as a partial sum plus a tail bound.  Tail
bounds are available when every infinite input is a :class:`PowerLog`
sequence ``c n^a (log n)^b``; plain arrays are read as finitely supported and
other callables lead to an ``"undetermined"`` verdict.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ._rng import map_trials
from .expsum import Box, ExpSum, certified_sup

__all__ = ["PowerLog", "WeightSequence", "BlockSchedule", "SeriesResult", "TailDiagnostic",
           "kappa_blocks", "dyadic_blocks", "check_kappa_properties", "series_condition",
           "thm41_maximal_constant", "uniform_tail_diagnostic", "CONDITION_IDS"]

CONDITION_IDS = ("THM41", "THM42", "THM45", "THM51", "THM12")


@dataclass(frozen=True)
class PowerLog:
    """The sequence ``c n^a (log n)^b`` for ``n >= start`` and ``0`` before.

    Instances multiply with each other and with scalars, and can be raised to
    real powers, so summands of the series conditions stay in this class.

    >>> f = PowerLog(1.0, -1.0, -2.0)
    >>> round(float(f(np.e ** 2)), 6) == round(1 / (4 * np.e ** 2), 6)
    True
    """

    c: float = 1.0
    a: float = 0.0
    b: float = 0.0
    start: int = 2

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("PowerLog needs c > 0")
        if self.start < 1 or (self.start < 2 and self.b != 0):
            raise ValueError("a log factor needs start >= 2")

    def __call__(self, n):
        x = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = self.c * x ** self.a * (np.log(x) ** self.b if self.b else 1.0)
        return np.where(x >= self.start, v, 0.0)

    def __mul__(self, other):
        if isinstance(other, PowerLog):
            return PowerLog(self.c * other.c, self.a + other.a, self.b + other.b,
                            max(self.start, other.start))
        return PowerLog(self.c * float(other), self.a, self.b, self.start)

    __rmul__ = __mul__

    def __pow__(self, r):
        return PowerLog(self.c ** r, self.a * r, self.b * r, self.start)

    def summable(self):
        """True when ``sum_n c n^a (log n)^b`` converges."""
        return self.a < -1 or (self.a == -1 and self.b < -1)

    def decreasing_from(self, x):
        """True when the function is nonincreasing on ``[x, inf)``."""
        return x > 1 and (self.a < 0 and self.a * math.log(x) + self.b <= 0
                          or self.a == 0 and self.b <= 0)

    def tail_integral(self, x):
        """``int_x^inf c t^a (log t)^b dt`` for ``x > e`` (``inf`` when divergent)."""
        return self.tail_integral_log(math.log(max(float(x), math.e)))

    def tail_integral_log(self, lx):
        """:meth:`tail_integral` from ``log x``; usable when ``x`` overflows a float."""
        if not self.summable():
            return math.inf
        lx = max(float(lx), 1.0 + 1e-12)
        lc = math.log(self.c)

        def g(v):
            if v > 700:
                return 0.0
            e = lc + (self.a + 1.0) * math.exp(v) + (self.b + 1.0) * v
            return math.exp(e) if e > -745 else 0.0

        val, _ = integrate.quad(g, math.log(lx), np.inf, limit=200)
        return float(val)

    def tail_sum(self, n0):
        """Upper bound on ``sum_{n >= n0}`` by the integral test (needs monotone tail)."""
        n0 = max(int(n0), self.start, 3)
        if not self.summable():
            return math.inf
        if not self.decreasing_from(n0):
            m = max(n0, math.ceil(math.exp(max(-self.b / self.a, 1.0))) + 1) if self.a < 0 else n0
            return float(self(np.arange(n0, m)).sum()) + self.tail_sum(m) if m > n0 else math.inf
        return float(self(n0)) + self.tail_integral(n0)


def _values(seq, n):
    """Values ``seq_1..seq_n`` and whether the sequence is known beyond ``n``.

    Returns ``(values, kind)`` with kind ``"finite"`` (array, zero past its
    length), ``"powerlog"`` or ``"callable"``.
    """
    if isinstance(seq, WeightSequence):
        seq = seq.source
    if isinstance(seq, PowerLog):
        return seq(np.arange(1, n + 1)), "powerlog"
    if callable(seq):
        return np.asarray(seq(np.arange(1, n + 1)), dtype=float).reshape(n), "callable"
    arr = np.asarray(seq, dtype=float).reshape(-1)
    out = np.zeros(n)
    out[:min(n, arr.size)] = arr[:n]
    if arr.size > n and np.any(arr[n:]):
        return out, "callable"
    return out, "finite"


@dataclass(frozen=True)
class WeightSequence:
    """Positive nondecreasing weights ``A_n`` with an optional growth cap ``A_n <= C n^gamma``.

    ``source`` is an array (``A_1, A_2, ...``), a :class:`PowerLog` or a
    vectorized callable of ``n``.
    """

    source: object
    C: float | None = None
    gamma: float | None = None

    def values(self, N):
        v, kind = _values(self.source, N)
        if kind == "finite" and np.asarray(self.source).size < N:
            raise ValueError(f"weights are given only up to n = {np.asarray(self.source).size}")
        if np.any(~np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("weights must be positive and finite")
        if np.any(np.diff(v) < 0):
            raise ValueError("weights must be nondecreasing")
        if self.C is not None and self.gamma is not None:
            n = np.arange(1, N + 1)
            if np.any(v > self.C * n ** self.gamma * (1 + 1e-12)):
                raise ValueError("weights exceed the declared cap C n^gamma")
        return v


@dataclass(frozen=True)
class BlockSchedule:
    """Block end points ``kappa_1 < kappa_2 < ...``; block ``n`` is ``(kappa_n, kappa_{n+1}]``.

    ``levels`` holds the dyadic level ``l_{n+1}`` of each block for dyadic
    schedules.  ``truncated`` is true when the last block was cut at the
    horizon rather than closed by the construction.
    """

    kappa: tuple
    levels: tuple | None = None
    truncated: bool = False
    horizon: int = 0

    def __post_init__(self):
        k = tuple(int(x) for x in self.kappa)
        if len(k) < 1 or any(b <= a for a, b in zip(k, k[1:])):
            raise ValueError("kappa must be strictly increasing")
        object.__setattr__(self, "kappa", k)

    @classmethod
    def dyadic(cls, top):
        """Blocks ``[2^j, 2^{j+1} - 1]`` for ``j = 0..top-1``."""
        return cls(tuple(2 ** j - 1 for j in range(top + 1)), tuple(range(top)), False, 2 ** top - 1)

    @property
    def blocks(self):
        """List of ``(first, last)`` index pairs, 1-based and inclusive."""
        return [(a + 1, b) for a, b in zip(self.kappa, self.kappa[1:])]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "first", "last", "level"])
        for i, (a, b) in enumerate(self.blocks, 1):
            lev = "" if self.levels is None else self.levels[i - 1]
            w.writerow([i, a, b, lev])
        return buf.getvalue()


def kappa_blocks(A, p, N):
    """Blocks on which ``A_m (log m)^p`` grows by at most a factor ``e``.

    ``kappa_1`` is the first index with ``A_k (log k)^p >= e`` and
    ``kappa_{n+1}`` is the largest ``m > kappa_n`` with
    ``A_m (log m)^p <= e A_{kappa_n+1} (log(kappa_n+1))^p``.

    Parameters
    ----------
    A : WeightSequence
    p : float
    N : int
        Horizon; the last block is cut at ``N`` when the construction would
        go further.

    Examples
    --------
    >>> kappa_blocks(WeightSequence(np.ones(10**4)), 1.0, 10**4).kappa[0]
    16
    """
    if not p > 0:
        raise ValueError("p must be positive")
    N = int(N)
    v = A.values(N)
    g = v * np.log(np.arange(1, N + 1)) ** p
    hit = np.flatnonzero(g >= math.e)
    if hit.size == 0:
        raise ValueError(f"no index k <= {N} with A_k (log k)^p >= e")
    kappa = [int(hit[0]) + 1]
    truncated = False
    while kappa[-1] < N:
        j = kappa[-1] + 1
        thr = math.e * g[j - 1]
        # g is nondecreasing, so the admissible set is an initial run from j
        last = int(np.searchsorted(g, thr * (1 + 1e-14), side="right"))
        if last >= N:
            last, truncated = N, g[N - 1] <= thr
        kappa.append(max(last, j))
    return BlockSchedule(tuple(kappa), None, truncated, N)


def check_kappa_properties(schedule, A, p, gamma=None):
    """Check properties (i)-(iii) of a :func:`kappa_blocks` schedule.

    Returns a dict of booleans.  The strict right half of (i) is checked
    only for blocks closed by the construction, and (iii) only when
    ``gamma`` (or ``A.gamma``) is known.
    """
    N = max(schedule.horizon, schedule.kappa[-1])
    v = A.values(N)
    idx = np.arange(1, N + 1)
    g = v * np.log(idx) ** p
    A_ = lambda k: v[k - 1]
    G = lambda k: g[k - 1]
    k = schedule.kappa
    gamma = A.gamma if gamma is None else gamma
    res = {"i": True, "ii": True, "iii": None if gamma is None else True}
    tiny = 1e-12
    for n in range(1, len(k)):
        kn, kn1 = k[n - 1], k[n]
        closed = not (schedule.truncated and n == len(k) - 1)
        if G(kn1) > math.e * G(kn + 1) * (1 + tiny):
            res["i"] = False
        if closed and kn1 + 1 <= N and not math.e * G(kn + 1) < G(kn1 + 1):
            res["i"] = False
        if A_(kn1) > math.e * A_(kn + 1) * (1 + tiny):
            res["ii"] = False
        if closed and A_(kn1) * math.log(kn + 1) ** p < math.e ** n * (1 - tiny):
            res["ii"] = False
        if gamma is not None and (p + gamma) * math.log(kn + 1) < n:
            res["iii"] = False
    return res


def dyadic_blocks(A, N):
    """Blocks on which ``A`` stays within one dyadic range ``[2^l, 2^{l+1})``.

    ``kappa_1 = 0``; block ``n`` starts at ``kappa_n + 1``, takes the level
    ``l`` of ``A_{kappa_n + 1}`` and ends at the last index whose weight is
    still below ``2^{l+1}``.

    >>> dyadic_blocks(WeightSequence(np.arange(1.0, 17.0)), 16).blocks
    [(1, 1), (2, 3), (4, 7), (8, 15), (16, 16)]
    """
    N = int(N)
    v = A.values(N)
    if v[0] < 1:
        raise ValueError("dyadic blocks need A_1 >= 1")
    lev = np.floor(np.log2(v)).astype(int)
    # guard against log2 rounding at exact powers of two
    lev = np.where(2.0 ** (lev + 1) <= v, lev + 1, lev)
    lev = np.where(2.0 ** lev > v, lev - 1, lev)
    if lev[-1] == lev[0]:
        raise ValueError(f"weights stay in one dyadic level on [1, {N}]; need unbounded weights")
    kappa, levels = [0], []
    while kappa[-1] < N:
        l = int(lev[kappa[-1]])
        last = int(np.searchsorted(v, 2.0 ** (l + 1), side="left"))
        kappa.append(last)
        levels.append(l)
    # the last block always reaches N, and A_{N+1} is unknown
    return BlockSchedule(tuple(kappa), tuple(levels), True, N)


def thm41_maximal_constant(p, gamma, series_value):
    """``2 e^{1/p} (1 + p^{(p-1)/p} (p + gamma)) * series_value^{1/p}``.

    >>> round(thm41_maximal_constant(2, 1, 1.0), 10) == round(2 * math.sqrt(math.e) * (1 + 3 * math.sqrt(2)), 10)
    True
    """
    if not p > 1:
        raise ValueError("p must exceed 1")
    if series_value < 0:
        raise ValueError("series value must be nonnegative")
    return 2 * math.e ** (1 / p) * (1 + p ** ((p - 1) / p) * (p + gamma)) * series_value ** (1 / p)


@dataclass(frozen=True)
class SeriesResult:
    """Partial sum up to the horizon, an upper bound on the remainder and a verdict."""

    condition_id: str
    partial_sum: float
    tail_bound: float
    verdict: str
    horizon: int
    note: str = ""

    @property
    def total_upper(self):
        return self.partial_sum + self.tail_bound


def _w_sum_bound(a, b, e):
    """Upper bound on ``sum_{n=a}^{b} 1 / (n (log n)^e)`` for ``2 <= a <= b`` (``b`` may be inf)."""
    if b < a:
        return 0.0
    a = max(a, 2)

    def W(x):
        if math.isinf(x):
            return math.inf if e <= 1 else 0.0
        lx = math.log(x)
        return math.log(lx) if e == 1 else lx ** (1 - e) / (1 - e)

    return 1.0 / (a * math.log(a) ** e) + W(b) - W(a)


def _inner_tail_series(x, g, r, e, N, x_tail=None, kmin_log=None):
    """``sum_{n>=2} (sum_{k: g_k >= n} x_k)^r / (n (log n)^e)`` up to ``N`` plus a remainder bound.

    ``x`` and ``g`` are arrays over ``k = 1..Nk``.  ``x_tail`` is a
    :class:`PowerLog` describing ``x_k`` for ``k > Nk`` (``None`` means zero)
    and ``kmin_log(log n)`` the log of a lower bound on every ``k > Nk``
    with ``g_k >= n``.
    """
    Nk = x.size
    n = np.arange(2, N + 1)
    w = 1.0 / (n * np.log(n) ** e)
    gi = np.minimum(np.floor(g), N + 1).astype(np.int64)
    hist = np.bincount(np.clip(gi, 0, N + 1), weights=x, minlength=N + 2)
    S = np.cumsum(hist[::-1])[::-1]          # S[j] = sum_{g_k >= j}
    partial = float(np.sum(S[2:N + 1] ** r * w))
    R0 = 0.0 if x_tail is None else x_tail.tail_sum(Nk + 1)
    if math.isinf(R0):
        return partial, math.inf
    extra = float(np.sum((S[2:N + 1] + R0) ** r * w)) - partial if R0 else 0.0
    cvx = 2.0 ** (r - 1) if r > 1 else 1.0
    # n > N, contribution of k <= Nk: piecewise constant in n
    big = np.sort(g[(g >= N + 1) & (x > 0)])
    fin = 0.0
    if big.size:
        gk = np.floor(g)
        lo = N + 1
        for hi in np.unique(np.floor(big)):
            s = float(x[gk >= hi].sum())
            fin += s ** r * _w_sum_bound(lo, int(hi), e)
            lo = int(hi) + 1
    tail = 0.0
    if x_tail is not None:
        def f(v):
            if v > 700:
                return 0.0
            u = math.exp(v)
            lk = kmin_log(u)
            lk = lk + math.log1p(-math.exp(-lk)) if lk > 1 else lk
            R = x_tail.tail_integral_log(max(math.log(Nk), lk))
            return R ** r * u ** (1.0 - e) if R > 0 else 0.0

        tail, _ = integrate.quad(f, math.log(math.log(N)), np.inf, limit=200)
        tail = float(tail)
    return partial, extra + cvx * (fin + tail)


def _classify(expo_a, expo_b):
    """Verdict from asymptotic summand ``n^a (log n)^b``."""
    return "converges" if (expo_a < -1 or (expo_a == -1 and expo_b < -1)) else "diverges"


def series_condition(condition_id, inputs, horizon=10**5):
    """Evaluate a convergence condition as a partial sum plus a tail bound.

    Parameters
    ----------
    condition_id : {"THM41", "THM42", "THM45", "THM51", "THM12"}
    inputs : dict
        ``THM41``: ``alpha``, ``A``, ``p``.
        ``THM42``: ``alpha``, ``A``, ``p``, ``q`` and ``form`` (``"dyadic"``
        or ``"log"``).
        ``THM45``: ``x2`` (``||X_k||_2^2``) and either ``gamma`` or
        ``freqs``; the default is ``gamma_k = k``.
        ``THM51`` / ``THM12``: ``x2`` and ``j`` (frequency vectors, or a
        :class:`PowerLog` for ``|j_n|*``; default ``j_n = n``).
        Sequences are arrays (finitely supported), :class:`PowerLog`
        objects or callables of ``n``.
    horizon : int

    Returns
    -------
    SeriesResult
        ``verdict`` is ``"converges"`` when the remainder bound is finite,
        ``"diverges"`` when the inputs are exact power-log sequences whose
        summands are not summable (or an inner tail is infinite), and
        ``"undetermined"`` otherwise.
    """
    cid = str(condition_id).upper()
    if cid not in CONDITION_IDS:
        raise ValueError(f"unknown condition {condition_id!r}; choose from {CONDITION_IDS}")
    N = int(horizon)
    if N < 16:
        raise ValueError("horizon must be at least 16")
    fn = {"THM41": _thm41, "THM42": _thm42, "THM45": _thm45, "THM51": _thm51, "THM12": _thm51}[cid]
    partial, tail, verdict, note = fn(dict(inputs), N)
    if verdict is None:
        verdict = "converges" if math.isfinite(tail) else "undetermined"
    if verdict == "diverges":
        tail = math.inf
    return SeriesResult(cid, float(partial), float(tail), verdict, N, note)


def _thm41(inp, N):
    p = float(inp["p"])
    al, ka = _values(inp["alpha"], N)
    Av, kA = _values(inp["A"], N)
    n = np.arange(1, N + 1)
    terms = al * Av * np.log(n) ** p
    partial = float(terms.sum())
    if ka == "finite":
        return partial, 0.0, "converges", "finitely supported"
    if ka == "callable" or not isinstance(_src(inp["A"]), PowerLog):
        return partial, math.inf, "undetermined", "no power-log envelope"
    f = _src(inp["alpha"]) * _src(inp["A"]) * PowerLog(1.0, 0.0, p)
    return partial, f.tail_sum(N + 1), _classify(f.a, f.b), ""


def _src(x):
    return x.source if isinstance(x, WeightSequence) else x


def _thm51(inp, N):
    x2, kx = _values(inp["x2"], N)
    j = inp.get("j")
    n = np.arange(1, N + 1)
    if j is None:
        jstar = n.astype(float)
        jpl = PowerLog(1.0, 1.0, 0.0, 1)
    elif isinstance(j, PowerLog):
        jstar = np.maximum.accumulate(j(n))
        jpl = j
    else:
        jarr = np.abs(np.asarray(j, dtype=float))
        jarr = jarr.reshape(jarr.shape[0], -1).max(axis=1)
        if jarr.size < min(N, np.flatnonzero(x2).max() + 1 if np.any(x2) else 0):
            raise ValueError("frequency indices are shorter than the coefficient sequence")
        jj = np.zeros(N)
        jj[:min(N, jarr.size)] = jarr[:N]
        jstar = np.maximum.accumulate(jj)
        jpl = None
    with np.errstate(divide="ignore"):
        lg = np.log(np.maximum(n, jstar))
    terms = x2 * lg * np.log(n) ** 2
    partial = float(terms.sum())
    if kx == "finite":
        return partial, 0.0, "converges", "finitely supported"
    if kx == "callable" or jpl is None or jpl.a < 0:
        return partial, math.inf, "undetermined", "no power-log envelope"
    X = N + 1
    lX = math.log(X)
    kap = max(1.0, jpl.a + (max(math.log(jpl.c), 0.0) + max(jpl.b, 0.0) * math.log(lX)) / lX,
              math.log(max(jstar[-1], 1.0)) / lX)
    f = _src(inp["x2"]) * PowerLog(kap, 0.0, 3.0)
    # log(n v |j_n|*) >= log n, so the lower summand has the same exponents
    return partial, f.tail_sum(X), _classify(f.a, f.b), ""


def _thm45(inp, N):
    src = inp["x2"]
    x2, kx = _values(src, N)
    k = np.arange(1, N + 1)
    kmin_log = lambda u: u
    if "freqs" in inp:
        lam = np.abs(np.asarray(inp["freqs"], dtype=float))
        lam = lam.reshape(lam.shape[0], -1).max(axis=1)
        gam = np.zeros(N)
        gam[:min(N, lam.size)] = lam[:N]
        gam = np.maximum(k, gam)
        gpl = None
    elif isinstance(inp.get("gamma"), PowerLog):
        gpl = inp["gamma"]
        if gpl.b != 0 or gpl.a < 1:
            return 0.0, math.inf, "undetermined", "gamma envelope must be c k^a with a >= 1"
        gam = np.maximum(k, gpl(k))
        cg = max(1.0, gpl.c)
        kmin_log = lambda u: (u - math.log(cg)) / gpl.a
    elif inp.get("gamma") is not None:
        g0 = np.asarray(inp["gamma"], dtype=float).reshape(-1)
        gam = np.maximum(k, np.concatenate([g0[:N], np.zeros(max(0, N - g0.size))]))
        gpl = None
    else:
        gam = k.astype(float)
        gpl = PowerLog(1.0, 1.0, 0.0, 1)
    if kx == "callable":
        p, _ = _inner_tail_series(x2, gam, 0.5, 0.5, N)
        return p, math.inf, "undetermined", "no power-log envelope"
    if kx == "finite":
        p, t = _inner_tail_series(x2, gam, 0.5, 0.5, N)
        return p, t, "converges", "finitely supported"
    if gpl is None:
        p, _ = _inner_tail_series(x2, gam, 0.5, 0.5, N)
        return p, math.inf, "undetermined", "gamma unknown beyond the horizon"
    if not src.summable():
        p, _ = _inner_tail_series(x2, gam, 0.5, 0.5, N)
        return p, math.inf, "diverges", "inner tail sums are infinite"
    p, t = _inner_tail_series(x2, gam, 0.5, 0.5, N, x_tail=src, kmin_log=kmin_log)
    ia, ib = (src.a + 1.0, src.b) if src.a < -1 else (0.0, src.b + 1.0)
    verdict = _classify(ia / (2 * gpl.a) - 1.0, ib / 2 - 0.5)
    if verdict == "converges" and not math.isfinite(t):
        verdict = "undetermined"
    return p, t, verdict, ""


def _levels(v):
    lev = np.floor(np.log2(v)).astype(int)
    lev = np.where(2.0 ** (lev + 1) <= v, lev + 1, lev)
    return np.where(2.0 ** lev > v, lev - 1, lev)


def _thm42(inp, N):
    p, q = float(inp["p"]), float(inp.get("q", 1.0))
    r = q / p
    al, ka = _values(inp["alpha"], N)
    Av, kA = _values(inp["A"], N)
    if Av[0] < 1:
        raise ValueError("THM42 needs A_1 >= 1")
    form = inp.get("form", "dyadic")
    if form == "log":
        g = np.exp2(np.minimum(Av, 1000.0))
        x_tail, kmin_log = None, None
        if ka == "powerlog":
            A = _src(inp["A"])
            if not (isinstance(A, PowerLog) and A.b == 0 and A.a > 0):
                p0, _ = _inner_tail_series(al, g, r, 1 - 1 / p, N)
                return p0, math.inf, "undetermined", "A must be c k^a for a tail bound"
            x_tail = _src(inp["alpha"])
            kmin_log = lambda u: (math.log(u / math.log(2)) - math.log(A.c)) / A.a
        elif ka == "callable":
            p0, _ = _inner_tail_series(al, g, r, 1 - 1 / p, N)
            return p0, math.inf, "undetermined", "no power-log envelope"
        part, tail = _inner_tail_series(al, g, r, 1 - 1 / p, N, x_tail=x_tail, kmin_log=kmin_log)
        return part, tail, None if ka == "powerlog" else "converges", ""
    if form != "dyadic":
        raise ValueError("form must be 'dyadic' or 'log'")
    # both ends of each dyadic range are closed, as displayed
    levs = _levels(Av)
    exact_top = Av == 2.0 ** levs
    if ka == "finite":
        last = int(np.flatnonzero(al).max()) + 1 if np.any(al) else 0
        mass = {}
        for i in range(last):
            for L in {int(levs[i])} | ({int(levs[i]) - 1} if exact_top[i] else set()):
                if L >= 0:
                    mass[L] = mass.get(L, 0.0) + al[i]
        total = sum(2 ** (L / p) * m ** r for L, m in mass.items())
        return total, 0.0, "converges", "finitely supported"
    complete = Av[-1]
    done = {}
    for i in range(N):
        for L in {int(levs[i])} | ({int(levs[i]) - 1} if exact_top[i] else set()):
            if L >= 0 and 2.0 ** (L + 1) < complete:
                done[L] = done.get(L, 0.0) + al[i]
    partial = sum(2 ** (L / p) * m ** r for L, m in done.items())
    A = _src(inp["A"])
    alpha = _src(inp["alpha"])
    if ka == "callable" or not (isinstance(A, PowerLog) and A.b == 0 and A.a > 0):
        return partial, math.inf, "undetermined", "tail needs power-log alpha and A = c k^a"
    L0 = int(np.floor(math.log2(complete))) - 1
    terms = []
    for L in range(max(L0, 0), max(L0, 0) + 400):
        klo = math.ceil((2.0 ** L / A.c) ** (1 / A.a))
        khi = math.floor((2.0 ** (L + 1) / A.c) ** (1 / A.a))
        if not math.isfinite(khi) or khi > 1e300:
            break
        if khi < klo:
            terms.append(0.0)
            continue
        klo = max(klo, alpha.start)
        if not alpha.decreasing_from(max(klo, 3)):
            return partial, math.inf, "undetermined", "alpha is not decreasing past the horizon"
        m = float(alpha(klo)) + max(alpha.tail_integral(max(klo, 3)) - alpha.tail_integral(khi), 0.0)
        terms.append(2 ** (L / p) * m ** r)
    rate = 1 / p + r * (alpha.a + 1) / A.a
    if rate == 0:
        # level terms behave like L^(r b)
        verdict = "undetermined" if r * alpha.b < -1 else "diverges"
    else:
        verdict = "converges" if rate < 0 else "diverges"
    if verdict != "converges":
        return partial, math.inf, verdict, ""
    t = np.array(terms)
    rho = 2.0 ** (rate * 0.5)   # dominates the asymptotic ratio 2**rate
    tail = float(t.sum()) + (t[-1] * rho / (1 - rho) if t.size else 0.0)
    return partial, tail, verdict, "geometric remainder after the last computed level"


@dataclass(frozen=True)
class TailDiagnostic:
    """Certified suprema of block sums and the decreasing-trend verdict."""

    blocks: tuple
    sups: tuple
    lower: tuple
    cauchy_consistent: bool
    status: str = "ok"

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["block", "first", "last", "sup_lower", "sup_upper"])
        for i, ((a, b), lo, up) in enumerate(zip(self.blocks, self.lower, self.sups), 1):
            w.writerow([i, a, b, repr(lo), repr(up)])
        return buf.getvalue()


class BudgetExceeded(RuntimeError):
    """A certified supremum did not reach its tolerance within the budget."""


def uniform_tail_diagnostic(path, freqs, box, schedule, tol=1e-6, *, rtol=1e-3,
                            max_evals=10**6, threads=1):
    """Certified ``sup_box |sum_{k in block} X_k exp(i <lam_k, t>)|`` for each block.

    The verdict is "Cauchy-consistent" when the mean over the last quarter of
    blocks is below a quarter of the mean over the first quarter (or every
    block sum vanishes).

    Parameters
    ----------
    path : array_like or SamplePath
        Coefficients ``X_1, X_2, ...``.
    freqs : array_like, shape (n, s) or (n,)
    box : Box
    schedule : BlockSchedule
    """
    x = np.asarray(getattr(path, "values", path), dtype=complex).reshape(-1)
    lam = np.asarray(freqs, dtype=float)
    lam = lam.reshape(-1, 1) if lam.ndim == 1 else lam
    blocks = [(a, b) for a, b in schedule.blocks if b >= a]
    if not blocks or blocks[-1][1] > min(x.size, lam.shape[0]):
        raise ValueError("schedule runs past the path")

    def one(i):
        a, b = blocks[i]
        P = ExpSum(x[a - 1:b], lam[a - 1:b])
        if not np.any(P.coeffs):
            return 0.0, 0.0, "ok"
        r = certified_sup(P, box, tol=tol, rtol=rtol, max_evals=max_evals)
        return r.lower, r.upper, r.status

    res = map_trials(one, len(blocks), threads)
    if any(s != "ok" for _, _, s in res):
        raise BudgetExceeded("a block supremum exceeded the evaluation budget")
    ups = np.array([u for _, u, _ in res])
    q = max(1, len(ups) // 4)
    first, last = ups[:q].mean(), ups[-q:].mean()
    ok = bool(last < first / 4 or not np.any(ups))
    return TailDiagnostic(tuple(blocks), tuple(float(u) for u in ups),
                          tuple(float(l) for l, _, _ in res), ok)
