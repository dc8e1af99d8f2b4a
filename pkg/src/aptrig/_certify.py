"""Branch-and-bound engine behind the certified supremum routines.

The box is covered by axis-aligned cells.  For each cell with centre ``c`` and
half-widths ``h`` an upper bound on ``sup |P|`` over the cell is the smaller of

* a Lipschitz bound ``|P(c)| + sum_i L_i h_i``, and
* a Taylor bound of order ``K``: the maximum of the affine model
  ``|P(c) + sum_i dP/dt_i(c) v_i h_i|`` over the vertices ``v`` of the cell,
  plus the exact higher derivatives ``sum_{2<=|a|<K} |D^a P(c)| h^a / a!`` and
  the Lagrange remainder ``sum_{|a|=K} h^a M_a / a!`` with
  ``M_a = sum_k |a_k| prod_i |lam_k^i|^{a_i}``.

The affine model is convex in ``t``, so its modulus attains the cell maximum at
a vertex.  A small floating-point slack is added to every bound.  Cells whose
bound falls below ``lower + tol`` are retired, the rest are bisected along the
axis with the largest ``L_i h_i``.

The first sweep evaluates a uniform grid.  Integer frequencies on the box
``[-pi, pi]^s`` use an FFT (aliasing is exact there); other frequencies use a
separable factorisation of the phase matrix so that the sweep is a sequence of
matrix products.  Prefix families (the running maximum over partial sums) are
evaluated directly with a cumulative sum over terms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

EPS = np.finfo(float).eps
DEFAULT_ORDER = 4
_CHUNK = 1 << 21  # complex entries per working block
_WORK = 4e7  # complex multiply-adds allowed in the first sweep


def multi_indices(s, degree):
    """All multi-indices of total ``degree`` in ``s`` variables (lexicographic)."""
    out = []
    for combo in itertools.combinations_with_replacement(range(s), degree):
        alpha = [0] * s
        for i in combo:
            alpha[i] += 1
        out.append(tuple(alpha))
    return sorted(set(out), reverse=True)


@dataclass
class _Model:
    """Derivative columns and moment tables for one family of sums."""

    freqs: np.ndarray      # (n, s)
    cols: np.ndarray       # (n, J) complex, a_k * prod (i lam)^alpha
    alphas: list           # derivative multi-indices, degrees 0..K-1
    fact: np.ndarray       # (J,) alpha!
    rem_alphas: list       # multi-indices of degree K
    rem: np.ndarray        # (F, R) remainder moments / alpha!
    lip: np.ndarray        # (F, s) Lipschitz constants
    absmom: np.ndarray     # (F, J) sum |cols| per family member
    amp: np.ndarray        # (F,) sum |a|
    prefix: bool

    @property
    def s(self):
        return self.freqs.shape[1]

    @property
    def n(self):
        return self.freqs.shape[0]


def build_model(coeffs, freqs, prefix, order=DEFAULT_ORDER):
    n, s = freqs.shape
    alphas = [a for d in range(order) for a in multi_indices(s, d)]
    rem_alphas = multi_indices(s, order)
    absa = np.abs(coeffs)
    absl = np.abs(freqs)

    def mono(alpha, base):
        out = np.ones(n, dtype=base.dtype)
        for i, e in enumerate(alpha):
            if e:
                out = out * base[:, i] ** e
        return out

    cols = np.empty((n, len(alphas)), dtype=complex)
    mags = np.empty((n, len(alphas)))
    fact = np.empty(len(alphas))
    for j, alpha in enumerate(alphas):
        cols[:, j] = coeffs * (1j ** sum(alpha)) * mono(alpha, freqs.astype(float))
        mags[:, j] = absa * mono(alpha, absl)
        fact[j] = math.prod(math.factorial(e) for e in alpha)
    remm = np.empty((n, len(rem_alphas)))
    for j, alpha in enumerate(rem_alphas):
        remm[:, j] = absa * mono(alpha, absl) / math.prod(math.factorial(e) for e in alpha)
    lipm = absa[:, None] * absl
    if prefix:
        red = lambda x: np.cumsum(x, axis=0)
    else:
        red = lambda x: x.sum(axis=0, keepdims=True)
    return _Model(freqs=freqs.astype(float), cols=cols, alphas=alphas, fact=fact,
                  rem_alphas=rem_alphas, rem=red(remm), lip=red(lipm),
                  absmom=red(mags), amp=red(absa[:, None])[:, 0], prefix=prefix)


def _hpow(h, alphas):
    out = np.ones((h.shape[0], len(alphas)))
    for j, alpha in enumerate(alphas):
        for i, e in enumerate(alpha):
            if e:
                out[:, j] *= h[:, i] ** e
    return out


def direct_data(model, centers):
    """Derivative data at ``centers``: shape (C, F, J)."""
    C = centers.shape[0]
    n, J = model.cols.shape
    F = n if model.prefix else 1
    out = np.empty((C, F, J), dtype=complex)
    step = max(1, _CHUNK // max(1, n * (J if model.prefix else 1)))
    for a in range(0, C, step):
        b = min(C, a + step)
        E = np.exp(1j * (centers[a:b] @ model.freqs.T))
        if model.prefix:
            out[a:b] = np.cumsum(E[:, :, None] * model.cols[None, :, :], axis=1)
        else:
            out[a:b, 0, :] = E @ model.cols
    return out


def _fft_data(model, counts):
    """Derivative data on the cell-centre grid of [-pi, pi]^s, integer freqs."""
    s = model.s
    lam = np.rint(model.freqs).astype(np.int64)
    J = model.cols.shape[1]
    B = np.zeros((J,) + tuple(counts), dtype=complex)
    shift = np.zeros(model.n)
    for i in range(s):
        shift += lam[:, i] * (math.pi / counts[i] - math.pi)
    idx = tuple(np.mod(lam[:, i], counts[i]) for i in range(s))
    w = model.cols * np.exp(1j * shift)[:, None]
    for j in range(J):
        np.add.at(B[j], idx, w[:, j])
    vals = scipy.fft.ifftn(B, axes=tuple(range(1, s + 1)), norm="forward")
    return vals.reshape(J, -1).T[:, None, :]


def _grid_factors(freqs_axis, T, N):
    step = 2.0 * T / N
    return np.exp(1j * np.outer(-T + (np.arange(N) + 0.5) * step, freqs_axis))


def _separable_data(model, T, counts):
    """Derivative data on a uniform grid through products of axis phase factors."""
    s = model.s
    n, J = model.cols.shape
    if s == 1:
        N = counts[0]
        step = 2.0 * T / N
        Bq = max(1, int(round(math.sqrt(N))))
        while N % Bq:
            Bq -= 1
        Q = N // Bq
        lam = model.freqs[:, 0]
        facs = [np.exp(1j * np.outer(-T + (np.arange(Q) * Bq + 0.5) * step, lam)),
                np.exp(1j * np.outer(np.arange(Bq) * step, lam))]
    else:
        facs = [_grid_factors(model.freqs[:, i], T, counts[i]) for i in range(s)]
    last = facs[-1]
    heads = facs[:-1]
    rows = math.prod(f.shape[0] for f in heads)
    out = np.empty((rows * last.shape[0], 1, J), dtype=complex)
    step_rows = max(1, _CHUNK // max(1, n))
    # enumerate rows of the Khatri-Rao product of the leading factors lazily
    grids = np.indices([f.shape[0] for f in heads]).reshape(len(heads), -1)
    for a in range(0, rows, step_rows):
        b = min(rows, a + step_rows)
        left = np.ones((b - a, n), dtype=complex)
        for f, g in zip(heads, grids):
            left = left * f[g[a:b]]
        for j in range(J):
            blk = (left * model.cols[:, j]) @ last.T
            out[a * last.shape[0]:b * last.shape[0], 0, j] = blk.reshape(-1)
    return out


def cell_bounds(model, data, h, T, want_lower=False):
    """Upper (and optionally lower) bounds of max over the family on each cell.

    Returns ``(value, ub)`` or ``(value, ub, lb)`` with arrays of shape (C, F):
    ``value`` is ``|P(c)|`` per family member.
    """
    s = model.s
    C = data.shape[0]
    hh = np.broadcast_to(h, (C, s))
    P0 = data[:, :, 0]
    G = data[:, :, 1:1 + s]
    absP0 = np.abs(P0)
    hp = _hpow(hh, model.alphas)
    hi = [j for j, a in enumerate(model.alphas) if sum(a) >= 2]
    poly = np.zeros_like(absP0)
    if hi:
        poly = np.einsum("cfj,cj->cf", np.abs(data[:, :, hi]), hp[:, hi] / model.fact[hi])
    rem = _hpow(hh, model.rem_alphas) @ model.rem.T
    lipdev = hh @ model.lip.T
    verts = np.array(list(itertools.product((-1.0, 1.0), repeat=s)))
    Gh = G * hh[:, None, :]
    affine = np.abs(P0[:, :, None] + Gh @ verts.T).max(axis=2)
    err = 16.0 * EPS * (model.n + 64) * (
        model.amp[None, :] + T * model.lip.sum(axis=1)[None, :]
        + hp @ (model.absmom / model.fact).T)
    ub = np.minimum(affine + poly + rem, absP0 + lipdev) + err
    if not want_lower:
        return absP0, ub
    gsum = np.einsum("cfi,ci->cf", np.abs(G), hh)
    lb = absP0 - (np.minimum(gsum + poly + rem, lipdev) + err)
    return absP0, ub, lb


@dataclass
class EngineResult:
    lower: float
    upper: float
    status: str
    argmax: np.ndarray
    n0: int
    evaluations: int


def plan_grid(model, T, tol_hint, cap, theta_min=0.2, theta=None):
    """Cells per axis for the first sweep.

    The phase half-width ``theta`` of a cell (radians swept by the fastest
    term) is chosen so that the remainder term alone stays below
    ``tol_hint``, but never below ``theta_min``: refinement is local, so a
    coarse start is cheaper unless cells are nearly free (FFT sweep).
    """
    s = model.s
    amp = float(model.amp[-1]) if not model.prefix else float(model.amp.max())
    K = sum(model.rem_alphas[0])
    lam = np.abs(model.freqs).max(axis=0)
    if theta is None:
        theta = (math.factorial(K) * tol_hint / max(2.0 * amp, 1e-300)) ** (1.0 / K) / s
        theta = min(max(theta, theta_min), 0.5)
    counts = [max(1, math.ceil(T * l / theta)) if l > 0 else 1 for l in lam]
    total = math.prod(counts)
    if total > cap:
        active = [i for i in range(s) if counts[i] > 1]
        scale = (total / cap) ** (1.0 / max(1, len(active)))
        counts = [max(1, int(c / scale)) if c > 1 else 1 for c in counts]
    return counts


def grid_centers(T, counts):
    axes = [-T + (np.arange(N) + 0.5) * (2.0 * T / N) for N in counts]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def sweep(model, centers, h, T, data=None):
    """Cell summaries: ``(best_value, best_cell, best_member, cell_ub)``.

    Derivative data are computed (or sliced from ``data``) block by block so
    that prefix families never hold the full ``(C, n, J)`` array.
    """
    C = centers.shape[0]
    F = model.n if model.prefix else 1
    step = max(1, _CHUNK // (F * model.cols.shape[1]))
    hh = np.broadcast_to(h, centers.shape)
    cell_ub = np.empty(C)
    best = (-1.0, 0, 0)
    for a in range(0, C, step):
        b = min(C, a + step)
        d = direct_data(model, centers[a:b]) if data is None else data[a:b]
        value, ub = cell_bounds(model, d, hh[a:b], T)
        cell_ub[a:b] = ub.max(axis=1)
        ci, fi = divmod(int(np.argmax(value)), value.shape[1])
        if value[ci, fi] > best[0]:
            best = (float(value[ci, fi]), a + ci, fi)
    return best[0], best[1], best[2], cell_ub


def run(coeffs, freqs, T, tol, rtol=0.0, max_evals=10**6, prefix=False,
        order=DEFAULT_ORDER):
    """Certified bracket for ``sup |P|`` (or the running prefix maximum)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    freqs = np.asarray(freqs, dtype=float)
    n, s = freqs.shape
    if n == 0 or not np.any(coeffs):
        return EngineResult(0.0, 0.0, "ok", np.zeros(s), 1 if n else 0, 0)
    model = build_model(coeffs, freqs, prefix, order)
    l2 = float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
    tol_hint = max(tol, rtol * l2)
    integer = (np.all(freqs == np.rint(freqs)) and abs(T - math.pi) <= 8 * EPS * math.pi
               and not prefix)
    if integer:
        cap = max(1, min(max_evals // 2, 1 << 21))
    else:
        cap = max(1, min(max_evals // 2, int(_WORK // max(1, n * (n if prefix else 1)))))
    counts = plan_grid(model, T, tol_hint, cap, theta_min=0.2 if integer else 0.5)
    data = None
    if integer:
        counts = [scipy.fft.next_fast_len(c) if c > 1 else 1 for c in counts]
        data = _fft_data(model, counts)
    elif not prefix and n >= 8 and math.prod(counts) >= 64:
        data = _separable_data(model, T, counts)
    h = np.array([T / c for c in counts])
    cells_c = grid_centers(T, counts)
    cells_h = np.tile(h, (cells_c.shape[0], 1))
    lower, ci, fi, cell_ub = sweep(model, cells_c, h, T, data)
    del data
    evals = cells_c.shape[0]
    best_pt = cells_c[ci].copy()
    best_n0 = fi + 1 if prefix else n
    lip = model.lip.max(axis=0)
    # the triangle inequality caps every partial sum by sum |a_k|
    l1 = float(np.abs(coeffs).sum()) * (1.0 + 16.0 * EPS * (n + 64))
    retired = 0.0
    status = "ok"
    while True:
        thresh = lower + max(tol, rtol * lower)
        if l1 <= thresh:
            retired = l1
            break
        keep = cell_ub > thresh
        if not np.all(keep):
            retired = max(retired, float(cell_ub[~keep].max()))
        cells_c, cells_h, cell_ub = cells_c[keep], cells_h[keep], cell_ub[keep]
        if cells_c.shape[0] == 0:
            break
        if evals + 2 * cells_c.shape[0] > max_evals:
            status = "budget_exceeded"
            retired = max(retired, float(cell_ub.max()))
            break
        rows = np.arange(cells_c.shape[0])
        axis = np.argmax(cells_h * lip[None, :], axis=1)
        half = cells_h[rows, axis] / 2.0
        offs = np.zeros_like(cells_c)
        offs[rows, axis] = half
        newh = cells_h.copy()
        newh[rows, axis] = half
        cells_c = np.concatenate([cells_c - offs, cells_c + offs])
        cells_h = np.concatenate([newh, newh])
        evals += cells_c.shape[0]
        value, ci, fi, cell_ub = sweep(model, cells_c, cells_h, T)
        if value > lower:
            lower = value
            best_pt = cells_c[ci].copy()
            best_n0 = fi + 1 if prefix else n
    upper = float(max(lower, min(retired, l1)))
    if status != "ok" and upper <= lower + max(tol, rtol * lower):
        status = "ok"
    return EngineResult(lower, upper, status, best_pt, best_n0, evals)
