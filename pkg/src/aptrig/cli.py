"""Command-line experiment runner.

Usage::

    aptrig <command> --config run.yaml [--seed N] [--out DIR] [--threads N]

Commands are ``sup``, ``verify-sigma``, ``check-bound``, ``blocks``,
``series``, ``ergodic`` and ``ww``.  The configuration is a YAML (or JSON)
mapping; see the ``demos/configs`` directory for one example per command.
Every run writes one or more CSV tables named after the quantity they
exercise plus ``manifest.json``, which echoes the configuration, the seed,
the package version and a hash of the configuration.

Exit status: 0 success, 1 invalid configuration, 2 a checked bound or
property failed, 3 a certified computation ran out of budget.  Nothing is
written when validation fails.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import convergence as cv
from . import ergodic_sim as es
from ._rng import stream
from .expsum import Box, ExpSum, certified_sup, loads, witness_rectangle
from .inequality_lab import BOUND_IDS, BoundReport, check_bound
from .random_processes import ProcessSpec, sample_path
from .sigma_systems import constant_system, exponential_system, uniform_system, verify_sigma_property

COMMANDS = ("sup", "verify-sigma", "check-bound", "blocks", "series", "ergodic", "ww")


class ConfigError(ValueError):
    pass


class BudgetError(RuntimeError):
    pass


# ---------------------------------------------------------------- parsing

def _get(cfg, key, kind=None, default=..., where=""):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"missing required key '{where}{key}'")
        return default
    v = cfg[key]
    if kind is int:
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(f"'{where}{key}' must be an integer")
    elif kind is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"'{where}{key}' must be a number")
        v = float(v)
    elif kind is dict and not isinstance(v, dict):
        raise ConfigError(f"'{where}{key}' must be a mapping")
    elif kind is list and not isinstance(v, list):
        raise ConfigError(f"'{where}{key}' must be a list")
    elif kind is str and not isinstance(v, str):
        raise ConfigError(f"'{where}{key}' must be a string")
    return v


def _complex(v):
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def _coeffs(v, key="coeffs"):
    if not isinstance(v, list):
        raise ConfigError(f"'{key}' must be a list")
    try:
        return np.array([_complex(x) for x in v], dtype=complex)
    except (TypeError, ValueError):
        raise ConfigError(f"'{key}' holds an entry that is not a number") from None


def _freqs(v, n_default=None):
    """Explicit list, ``"integers"`` or ``{kind: integers|random, n, s, scale}``."""
    if isinstance(v, str):
        v = {"kind": v}
    if isinstance(v, dict):
        kind = _get(v, "kind", str, where="freqs.")
        n = _get(v, "n", int, n_default, where="freqs.")
        s = _get(v, "s", int, 1, where="freqs.")
        if n is None or n < 1 or s < 1:
            raise ConfigError("'freqs.n' and 'freqs.s' must be positive")
        if kind == "integers":
            return np.tile(np.arange(1, n + 1, dtype=float)[:, None], (1, s))
        if kind == "random":
            scale = _get(v, "scale", float, 10.0, where="freqs.")
            seed = _get(v, "seed", int, 0, where="freqs.")
            return stream(seed, "freqs").uniform(-scale, scale, size=(n, s))
        raise ConfigError("'freqs.kind' must be 'integers' or 'random'")
    try:
        lam = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ConfigError("'freqs' must be numeric") from None
    if lam.ndim == 1:
        lam = lam[:, None]
    if lam.ndim != 2 or lam.size == 0 or not np.all(np.isfinite(lam)):
        raise ConfigError("'freqs' must be a nonempty (n, s) array")
    return lam


def _process(v):
    if not isinstance(v, dict):
        raise ConfigError("'process' must be a mapping")
    allowed = {"family", "magnitudes", "bound", "window", "seed", "phase"}
    extra = set(v) - allowed
    if extra:
        raise ConfigError(f"unknown process keys {sorted(extra)}")
    kw = dict(v)
    if "magnitudes" in kw and kw["magnitudes"] is not None:
        kw["magnitudes"] = tuple(float(x) for x in kw["magnitudes"])
    try:
        return ProcessSpec(**kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad process: {exc}") from None


def _sequence(v, key):
    """A list, ``{powerlog: [c, a, b(, start)]}`` or a scalar constant (as PowerLog)."""
    if isinstance(v, dict) and "powerlog" in v:
        args = v["powerlog"]
        if not isinstance(args, list) or not 1 <= len(args) <= 4:
            raise ConfigError(f"'{key}.powerlog' must be [c, a, b] or [c, a, b, start]")
        try:
            return cv.PowerLog(*[float(x) for x in args[:3]], *[int(x) for x in args[3:]])
        except ValueError as exc:
            raise ConfigError(f"'{key}': {exc}") from None
    if isinstance(v, list):
        try:
            return np.asarray(v, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"'{key}' must be numeric") from None
    raise ConfigError(f"'{key}' must be a list or a powerlog mapping")


# ---------------------------------------------------------------- output

class Table:
    def __init__(self, name, header):
        self.name, self.header, self.rows = name, list(header), []

    def add(self, *row):
        self.rows.append([_fmt(x) for x in row])

    def text(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        w.writerows(self.rows)
        return buf.getvalue()


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return int(x)
    return x


class Outcome:
    def __init__(self):
        self.tables, self.failed, self.budget, self.summary = [], False, False, {}


# ---------------------------------------------------------------- commands

def _cmd_sup(cfg, seed, threads):
    out = Outcome()
    if "expsum" in cfg:
        P = loads(_get(cfg, "expsum", str))
    else:
        a = _coeffs(_get(cfg, "coeffs", list))
        lam = _freqs(_get(cfg, "freqs"), a.size)
        P = ExpSum(a, lam)
    T = _get(cfg, "T", float, math.pi)
    tol = _get(cfg, "tol", float, 1e-6)
    rtol = _get(cfg, "rtol", float, 0.0)
    budget = _get(cfg, "max_evals", int, 10**6)
    wit = _get(cfg, "witness", dict, None)
    box = Box(T, P.dim)
    t = Table("sup_certified", ["id", "n", "s", "T", "lower", "upper", "width", "status",
                                "evaluations", "argmax"])
    b = certified_sup(P, box, tol=tol, rtol=rtol, max_evals=budget)
    am = "" if b.argmax is None else " ".join(repr(float(x)) for x in np.atleast_1d(b.argmax))
    t.add("certified_sup", P.n, P.dim, T, b.lower, b.upper, b.width, b.status, b.evaluations, am)
    out.tables.append(t)
    out.budget |= b.status != "ok"
    if wit is not None:
        m = _get(wit, "m", int, P.n, where="witness.")
        r = witness_rectangle(P, m, box, tol=_get(wit, "tol", float, 1e-3, where="witness."),
                              monotone=bool(wit.get("monotone", False)))
        w = Table("sup_witness_rectangle", ["id", "m", "axis", "center", "half_width", "lo", "hi",
                                            "area", "area_bound", "M", "n0"])
        for i in range(P.dim):
            w.add("witness_rectangle", m, i + 1, r.center[i], r.half_widths[i], r.lo[i], r.hi[i],
                  r.area, r.area_bound, r.M, r.n0)
        out.tables.append(w)
        out.failed |= not r.area >= r.area_bound * (1 - 1e-12)
    return out


def _cmd_verify_sigma(cfg, seed, threads):
    out = Outcome()
    lam = _freqs(_get(cfg, "freqs"))
    family = _get(cfg, "system", str, "exponential")
    T = _get(cfg, "T", float, 1.0)
    m = _get(cfg, "m", int, lam.shape[0])
    draws = _get(cfg, "draws", int, 1)
    rho2 = _get(cfg, "rho2", float, 0.5)
    if not 0 < rho2 < 1:
        raise ConfigError("'rho2' must lie in (0, 1)")
    if family == "exponential":
        system = exponential_system(lam, rho2=rho2)
    elif family == "uniform":
        system = uniform_system(lam, rho2=rho2)
    elif family == "constant":
        system = constant_system(lam.shape[0], lam.shape[1], rho2=rho2)
    else:
        raise ConfigError("'system' must be exponential, uniform or constant")
    fixed = _coeffs(cfg["coeffs"]) if "coeffs" in cfg else None
    t = Table(f"verify-sigma_{system.label}", ["id", "draw", "m", "measure", "measure_upper",
                                               "grid_estimate", "required", "status", "M_lower",
                                               "M_upper"])
    box = Box(T, system.dim)
    for d in range(draws):
        if fixed is not None and d == 0:
            a = fixed
        else:
            rng = stream(seed, "verify-sigma", d)
            a = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        r = verify_sigma_property(system, a, m, box)
        t.add(system.label, d, m, r.measure, r.measure_upper, r.grid_estimate, r.required,
              r.status, r.M_lower, r.M_upper)
        out.failed |= r.status == "fail"
        out.budget |= r.status == "too_coarse"
    out.tables.append(t)
    return out


def _cmd_check_bound(cfg, seed, threads):
    out = Outcome()
    ids = cfg.get("bound_ids", cfg.get("bound_id"))
    if ids is None:
        raise ConfigError("missing required key 'bound_id'")
    ids = [ids] if isinstance(ids, str) else list(ids)
    for b in ids:
        if b not in BOUND_IDS:
            raise ConfigError(f"unknown bound id {b!r}")
    proc = _process(_get(cfg, "process", dict))
    m = _get(cfg, "m", int)
    n = _get(cfg, "n", int, 0)
    lam = _freqs(_get(cfg, "freqs", default="integers"), m)
    T = _get(cfg, "T", float, math.pi)
    trials = _get(cfg, "trials", int)
    p = cfg.get("p")
    trunc = cfg.get("truncation")
    if trunc is not None:
        trunc = [tuple(x) for x in trunc]
    for b in ids:
        rep = check_bound(b, proc, lam, n, m, Box(T, lam.shape[1]), p=p, trials=trials,
                          seed=seed, threads=threads, tol=_get(cfg, "tol", float, 1e-9),
                          rtol=_get(cfg, "rtol", float, 1e-4), truncation=trunc)
        t = Table(f"check-bound_{b}", list(BoundReport.FIELDS))
        t.add(*rep.row())
        out.tables.append(t)
        out.failed |= not rep.passed
    return out


def _cmd_blocks(cfg, seed, threads):
    out = Outcome()
    kind = _get(cfg, "kind", str)
    N = _get(cfg, "N", int)
    w = _sequence(_get(cfg, "weights"), "weights")
    A = cv.WeightSequence(w, cfg.get("C"), cfg.get("gamma"))
    if kind == "kappa":
        p = _get(cfg, "p", float)
        sched = cv.kappa_blocks(A, p, N)
        props = cv.check_kappa_properties(sched, A, p)
        out.summary["properties"] = props
        out.failed |= any(v is False for v in props.values())
    elif kind == "dyadic":
        sched = cv.dyadic_blocks(A, N)
    else:
        raise ConfigError("'kind' must be 'kappa' or 'dyadic'")
    t = Table(f"blocks_{kind}", ["id", "block", "first", "last", "level"])
    for i, (a, b) in enumerate(sched.blocks, 1):
        t.add(kind, i, a, b, "" if sched.levels is None else sched.levels[i - 1])
    out.tables.append(t)
    return out


def _cmd_series(cfg, seed, threads):
    out = Outcome()
    cid = _get(cfg, "condition_id", str).upper()
    if cid not in cv.CONDITION_IDS:
        raise ConfigError(f"unknown condition id {cid!r}")
    raw = _get(cfg, "inputs", dict)
    inputs = {}
    for k, v in raw.items():
        if k in ("p", "q"):
            inputs[k] = float(v)
        elif k == "form":
            inputs[k] = str(v)
        elif k in ("freqs", "j") and isinstance(v, list):
            inputs[k] = np.asarray(v, dtype=float)
        else:
            inputs[k] = _sequence(v, f"inputs.{k}")
    r = cv.series_condition(cid, inputs, _get(cfg, "horizon", int, 10**5))
    t = Table(f"series_{cid}", ["id", "horizon", "partial_sum", "tail_bound", "verdict", "note"])
    t.add(cid, r.horizon, r.partial_sum, r.tail_bound, r.verdict, r.note)
    out.tables.append(t)
    return out


def _fourier(v):
    if not isinstance(v, dict) or not v:
        raise ConfigError("'f' must be a nonempty mapping of mode -> coefficient")
    try:
        return es.FourierFunction({int(k): _complex(c) for k, c in v.items()})
    except (TypeError, ValueError):
        raise ConfigError("'f' must map integer modes to numbers") from None


def _schedule(v, n, s):
    if v is None or v == "identity":
        return es.PowerSchedule.identity(n, s)
    try:
        return es.PowerSchedule(np.asarray(v, dtype=np.int64))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}") from None


def _cmd_ergodic(cfg, seed, threads):
    out = Outcome()
    task = _get(cfg, "task", str)
    alphas = cfg.get("alphas")
    s = _get(cfg, "s", int, 1 if alphas is None else len(alphas))
    system = es.TorusRotationSystem.default(s) if alphas is None else es.TorusRotationSystem(alphas)
    if task == "transfer":
        cases = _get(cfg, "cases", int)
        n_max = _get(cfg, "n_max", int, 16)
        t = Table("ergodic_transfer", ["id", "case", "lhs", "rhs", "holds", "status"])
        for c in range(cases):
            rng = stream(seed, "transfer", c)
            n = int(rng.integers(1, n_max + 1))
            f = es.FourierFunction.random(5, rng)
            sch = es.PowerSchedule(rng.integers(0, 4 * n_max, size=(n, system.s)))
            a = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            r = es.spectral_transfer_check(a, sch, f, system)
            t.add("transfer", c, r.lhs, r.rhs, r.lhs <= r.rhs + 1e-9, r.status)
            out.failed |= r.lhs > r.rhs + 1e-9
        out.tables.append(t)
        return out
    if task not in ("weighted", "normalized"):
        raise ConfigError("'task' must be transfer, weighted or normalized")
    grid = [int(x) for x in _get(cfg, "N_grid", list)]
    proc = _process(_get(cfg, "process", dict))
    f = _fourier(_get(cfg, "f", dict))
    y = np.asarray(_get(cfg, "y", list, [0.0]), dtype=float)
    sch = _schedule(cfg.get("schedule"), max(grid), system.s)
    path = sample_path(proc, max(grid), seed_override=seed)
    if task == "weighted":
        tr = es.weighted_series_partial_sums(path, sch, f, system, y, grid)
        name = "ergodic_weighted"
    else:
        q = _get(cfg, "q", float)
        tr = es.normalized_series(path, sch, f, system, q, y, grid)
        name = "ergodic_normalized"
    t = Table(name, ["id", "N", "y", "re", "im", "tail_l2"])
    for i, N in enumerate(tr.N_grid):
        for yy, v in zip(tr.y, tr.values[i]):
            t.add(task, N, float(yy), float(v.real), float(v.imag), float(tr.tails[i]))
    out.tables.append(t)
    out.summary["settles_from"] = tr.settles_from
    return out


def _window_function(v):
    kind = _get(v, "kind", str, where="function.")
    if kind == "digit":
        return es.digit_function()
    if kind == "cylinder":
        return es.prop63_function(_get(v, "k", int, where="function."),
                                  _get(v, "pattern", list, where="function."))
    if kind == "table":
        return es.BernoulliWindowFunction(np.asarray(_get(v, "table", list, where="function.")))
    raise ConfigError("'function.kind' must be digit, cylinder or table")


def _cmd_ww(cfg, seed, threads):
    out = Outcome()
    try:
        f = _window_function(_get(cfg, "function", dict))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    grid = [int(x) for x in _get(cfg, "n_grid", list)]
    p = _get(cfg, "p", float, 2.0)
    trials = _get(cfg, "trials", int)
    task = _get(cfg, "task", str, "norm")
    if task == "prop63":
        r = es.prop63_check(f, grid, p, trials, seed, threads)
        t = Table("ww_prop63", ["id", "n", "value", "stderr", "bound"])
        for n, v, se in zip(r.n_grid, r.ratios, r.stderr):
            t.add("prop63", n, v, se, r.bound)
        out.tables.append(t)
        out.failed |= not r.passed
        return out
    if task not in ("norm", "fit"):
        raise ConfigError("'task' must be norm, fit or prop63")
    ests = [es.ww_norm(f, n, p, trials, seed, threads=threads) for n in grid]
    t = Table("ww_norm", ["id", "n", "value", "stderr", "rhs_prop61"])
    for e in ests:
        t.add("ww_norm", e.n, e.value, e.stderr, es.ww_rhs_prop61(f, e.n, p))
        out.failed |= e.value > es.ww_rhs_prop61(f, e.n, p)
    out.tables.append(t)
    if task == "fit":
        fit = es.ww_exponent_fit(grid, [e.value for e in ests])
        ft = Table("ww_exponent_fit", ["id", "alpha", "stderr", "const"])
        ft.add("ww_exponent_fit", fit.alpha, fit.stderr, fit.const)
        out.tables.append(ft)
    return out


HANDLERS = {"sup": _cmd_sup, "verify-sigma": _cmd_verify_sigma, "check-bound": _cmd_check_bound,
            "blocks": _cmd_blocks, "series": _cmd_series, "ergodic": _cmd_ergodic, "ww": _cmd_ww}


# ---------------------------------------------------------------- driver

def _parser():
    ap = argparse.ArgumentParser(prog="aptrig", description="Run a configured experiment.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="YAML or JSON configuration file")
    ap.add_argument("--seed", type=int, default=None, help="override the configured seed")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo trials")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if math.isfinite(x) else repr(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def run(command, config_path, seed=None, out_dir="out", threads=1, stderr=sys.stderr):
    """Run one command; returns the exit status."""
    try:
        text = Path(config_path).read_text()
        cfg = yaml.safe_load(text)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read config: {exc}", file=stderr)
        return 1
    if not isinstance(cfg, dict):
        print("error: config must be a mapping", file=stderr)
        return 1
    if cfg.get("command", command) != command:
        print(f"error: config is for '{cfg['command']}', not '{command}'", file=stderr)
        return 1
    if seed is None:
        seed = cfg.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
        print("error: seed must be an unsigned 64-bit integer", file=stderr)
        return 1
    if threads < 1:
        print("error: --threads must be >= 1", file=stderr)
        return 1
    body = {k: v for k, v in cfg.items() if k not in ("command", "seed")}
    try:
        outcome = HANDLERS[command](body, seed, threads)
    except (ConfigError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=stderr)
        return 1
    except RuntimeError as exc:
        if not isinstance(exc, (cv.BudgetExceeded, BudgetError)) and "budget" not in str(exc):
            raise
        print(f"budget exhausted: {exc}", file=stderr)
        return 3
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {}
    for t in outcome.tables:
        data = t.text()
        (out / f"{t.name}.csv").write_text(data)
        files[f"{t.name}.csv"] = hashlib.sha256(data.encode()).hexdigest()
    manifest = {
        "tool": "aptrig", "version": __version__, "command": command, "seed": seed,
        "config": _jsonable(cfg),
        "config_sha256": hashlib.sha256(json.dumps(_jsonable(cfg), sort_keys=True).encode()).hexdigest(),
        "files": files, "summary": _jsonable(outcome.summary),
        "failed": outcome.failed, "budget_exhausted": outcome.budget,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    if outcome.budget:
        return 3
    return 2 if outcome.failed else 0


def main(argv=None):
    args = _parser().parse_args(argv)
    return run(args.command, args.config, args.seed, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
