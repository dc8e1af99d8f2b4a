"""Acceptance suite: one PASS/FAIL line per criterion, at the stated tolerances.

Run with ``pytest tests/test_acceptance.py -v`` (the lines are printed even
when output is captured) or directly with ``python tests/test_acceptance.py``.
"""
import math
import time
from pathlib import Path

import numpy as np
import pytest

from aptrig._rng import stream
from aptrig.cli import COMMANDS, main
from aptrig.convergence import WeightSequence, check_kappa_properties, kappa_blocks
from aptrig.ergodic_sim import (FourierFunction, PowerSchedule, TorusRotationSystem,
                                digit_function, prop63_check, prop63_function,
                                spectral_transfer_check, ww_exponent_fit, ww_norm)
from aptrig.expsum import (Box, ExpSum, certified_sup, evaluate, gradient_bound, lemma21_check,
                           witness_check, witness_rectangle)
from aptrig.inequality_lab import check_bound, moricz_exact, moricz_exhaustive, salem_zygmund_growth
from aptrig.random_processes import ProcessSpec
from aptrig.sigma_systems import exponential_system, verify_sigma_property

CONFIGS = Path(__file__).resolve().parent.parent / "demos" / "configs"


def report(capsys, number, ok, detail, started):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {detail} ({time.time() - started:.1f} s)"
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


def _random_expsum(rng):
    n = int(rng.integers(1, 65))
    s = int(rng.integers(1, 3))
    if rng.random() < 0.5:
        lam = rng.integers(-16, 17, (n, s)).astype(float)
    else:
        lam = rng.uniform(-16, 16, (n, s))
    a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return ExpSum(a, lam)


def _grid_max(P, T, points=10**6):
    per_axis = round(points ** (1 / P.dim))
    ax = np.linspace(-T, T, per_axis)
    best = 0.0
    if P.dim == 1:
        chunks = np.array_split(ax, 20)
        for c in chunks:
            best = max(best, float(np.abs(evaluate(P, c[:, None])).max()))
    else:
        for rows in np.array_split(ax, 50):
            pts = np.stack(np.meshgrid(rows, ax, indexing="ij"), -1).reshape(-1, 2)
            best = max(best, float(np.abs(evaluate(P, pts)).max()))
    return best, 2 * T / (per_axis - 1)


def test_c01_certified_maximization(capsys):
    t0 = time.time()
    rng = stream(2024, "acceptance", 1)
    T = math.pi
    worst_width, bad = 0.0, []
    for i in range(100):
        P = _random_expsum(rng)
        b = certified_sup(P, Box(T, P.dim), tol=1e-3)
        gmax, h = _grid_max(P, T)
        # the grid misses the true maximizer by at most half a cell diagonal
        slack = float(np.linalg.norm(gradient_bound(P))) * h * math.sqrt(P.dim) / 2
        worst_width = max(worst_width, b.width)
        if not (b.status == "ok" and gmax <= b.upper + 1e-12 and b.lower <= gmax + slack
                and b.width <= 1e-3):
            bad.append(i)
    report(capsys, 1, not bad,
           f"100 certified brackets contain the 10^6-point grid maximum, worst width "
           f"{worst_width:.2e} <= 1e-3, failures {bad}", t0)


def test_c02_derivative_and_witness(capsys):
    t0 = time.time()
    rng = stream(2024, "acceptance", 2)
    worst_slack, worst_ratio, area_ok = math.inf, math.inf, True
    for i in range(1000):
        n = int(rng.integers(1, 17))
        s = int(rng.integers(1, 3))
        monotone = s == 1 and rng.random() < 0.3
        if monotone:
            lam = np.sort(rng.uniform(0.1, 12, n))[:, None]
        else:
            lam = rng.uniform(-12, 12, (n, s))
        P = ExpSum(rng.standard_normal(n) + 1j * rng.standard_normal(n), lam)
        m = int(rng.integers(1, n + 1))
        box = Box(float(rng.uniform(1.0, math.pi)), s)
        sampled, bound = lemma21_check(P, m, box, monotone=monotone, n_points=4000)
        worst_slack = min(worst_slack, bound - sampled)
        rect = witness_rectangle(P, m, box, tol=1e-3, monotone=monotone)
        worst_ratio = min(worst_ratio, witness_check(P, m, rect, 200, rng))
        area_ok &= rect.area >= rect.area_bound * (1 - 1e-12)
    ok = worst_slack >= -1e-9 and worst_ratio >= 0.5 - 1e-3 and area_ok
    report(capsys, 2, ok,
           f"1000 instances: derivative slack min {worst_slack:.3g} >= -1e-9, witness ratio min "
           f"{worst_ratio:.4f} >= 0.499, clipped area bound met: {area_ok}", t0)


def test_c03_sigma_verification(capsys):
    t0 = time.time()
    rng = stream(2024, "acceptance", 3)
    statuses = {}
    for i in range(500):
        s = int(rng.integers(1, 3))
        m = int(rng.integers(1, 33))
        if rng.random() < 0.3:
            lam = np.sort(rng.uniform(0.2, 10, (m, s)), axis=0)
        else:
            lam = rng.uniform(-10, 10, (m, s))
        sysm = exponential_system(lam)
        a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        r = verify_sigma_property(sysm, a, m, Box(1.0, s))
        statuses[r.status] = statuses.get(r.status, 0) + 1
    report(capsys, 3, statuses.get("pass", 0) == 500,
           f"500 exponential-system draws (s in {{1,2}}, m <= 32): {statuses}", t0)


def test_c04_orlicz_bound(capsys):
    t0 = time.time()
    r = check_bound("THM31_ORLICZ", ProcessSpec("rademacher"), np.arange(1.0, 33.0), 0, 32,
                    Box(math.pi, 1), trials=10**4, seed=2024, threads=4)
    ok = r.lhs + 3 * r.stderr <= r.rhs and r.margin > 10
    report(capsys, 4, ok,
           f"Orlicz mean {r.lhs:.6f} + 3*{r.stderr:.2e} <= {r.rhs:.1f}, margin {r.margin:.0f} > 10", t0)


def test_c05_moricz_exhaustive(capsys):
    t0 = time.time()
    worst = {(4, 2): 0.0, (2, 1): 0.0}
    holds = True
    for L in range(1, 7):
        for (p, q) in worst:
            # the uniform measure on all sign sequences of length L
            chk = moricz_exhaustive(L, p, q)
            holds &= chk.holds
            worst[(p, q)] = max(worst[(p, q)], chk.worst_ratio)
            # and each sign sequence on its own, as a point mass
            for code in range(2 ** L):
                seq = np.array([1.0 if (code >> k) & 1 else -1.0 for k in range(L)])
                chk = moricz_exact(seq[None, :], [1.0], p, q)
                holds &= chk.holds
                worst[(p, q)] = max(worst[(p, q)], chk.worst_ratio)
    report(capsys, 5, holds,
           f"all sign sequences of length <= 6: worst lhs/rhs {worst[(4, 2)]:.3f} (p=4, q=2), "
           f"{worst[(2, 1)]:.3f} (p=2, q=1)", t0)


def test_c06_kappa_properties(capsys):
    t0 = time.time()
    rng = stream(2024, "acceptance", 6)
    N = 10**5
    done, failures, blocks = 0, [], 0
    while done < 50:
        c = float(rng.uniform(0.2, 1.0))
        a = float(rng.uniform(0.0, 2.0))
        b = float(rng.uniform(0.0, 3.0 - a))
        p = float(rng.uniform(0.5, 3.0))
        # c n^a (1 + log n)^b <= n^(a+b) since 1 + log n <= n
        A = WeightSequence(lambda n, c=c, a=a, b=b: c * n ** a * (1 + np.log(n)) ** b,
                           C=1.0, gamma=a + b)
        try:
            sched = kappa_blocks(A, p, N)
        except ValueError:
            continue   # never reaches A_k (log k)^p >= e inside the horizon
        done += 1
        blocks += len(sched.blocks)
        res = check_kappa_properties(sched, A, p)
        if not all(res.values()):
            failures.append((c, a, b, p, res))
    report(capsys, 6, not failures,
           f"50 power-log weight sequences (gamma <= 3), {blocks} blocks to 1e5: "
           f"properties (i)-(iii) failures {failures}", t0)


def test_c07_spectral_transfer(capsys):
    t0 = time.time()
    rng = stream(2024, "acceptance", 7)
    worst = -math.inf
    for i in range(1000):
        s = int(rng.integers(1, 3))
        n = int(rng.integers(1, 25))
        sysm = TorusRotationSystem.default(s) if rng.random() < 0.7 else \
            TorusRotationSystem(tuple(rng.random(s)))
        f = FourierFunction.random(int(rng.integers(1, 8)), rng)
        sched = PowerSchedule(rng.integers(0, 40, (n, s)))
        a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        chk = spectral_transfer_check(a, sched, f, sysm)
        worst = max(worst, chk.lhs - chk.rhs)
    report(capsys, 7, worst <= 1e-9, f"1000 transfer cases: max(lhs - rhs) = {worst:.3g} <= 1e-9", t0)


def test_c08_salem_zygmund(capsys):
    t0 = time.time()
    rows = salem_zygmund_growth([2 ** k for k in range(6, 13)], trials=200, seed=2024, threads=4)
    ratios = [r.ratio for r in rows]
    top = ratios[-3:]
    spread = (max(top) - min(top)) / min(top)
    ok = all(0.5 <= x <= 3 for x in ratios) and spread < 0.25
    report(capsys, 8, ok,
           "ratios " + ", ".join(f"{x:.3f}" for x in ratios) + f" in [0.5, 3], top-three spread "
           f"{100 * spread:.1f}% < 25%", t0)


def test_c09_wiener_wintner(capsys):
    t0 = time.time()
    grid = [2 ** k for k in range(8, 15)]
    f = digit_function()
    norms = [ww_norm(f, n, p=2, trials=100, seed=2024, threads=4).value for n in grid]
    fit = ww_exponent_fit(grid, norms)
    margins = []
    for k in (1, 2, 3):
        rep = prop63_check(prop63_function(k, [1] * k), [2 ** 6, 2 ** 8, 2 ** 10], p=2,
                           trials=50, seed=2024, threads=4)
        margins.append(rep.margin if rep.passed else 0.0)
    ok = 0.40 <= fit.alpha <= 0.50 and all(m > 1 for m in margins)
    report(capsys, 9, ok,
           f"alpha-hat {fit.alpha:.4f} +- {fit.stderr:.4f} in [0.40, 0.50]; window bound margins "
           + ", ".join(f"k={k}: {m:.0f}" for k, m in zip((1, 2, 3), margins)), t0)


def test_c10_cli_determinism(capsys, tmp_path):
    t0 = time.time()
    same = {}
    for cmd in COMMANDS:
        outs = []
        for threads in (1, 2, 4):
            out = tmp_path / f"{cmd}_{threads}"
            code = main([cmd, "--config", str(CONFIGS / f"{cmd}.yaml"), "--out", str(out),
                         "--threads", str(threads)])
            outs.append((code, {p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))}))
        same[cmd] = all(o == outs[0] for o in outs) and outs[0][0] == 0 and bool(outs[0][1])
    report(capsys, 10, all(same.values()),
           "CSV bytes identical for --threads 1, 2, 4: "
           + ", ".join(f"{c}={'yes' if v else 'NO'}" for c, v in same.items()), t0)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
