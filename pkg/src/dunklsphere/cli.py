"""Command-line front end: one JSON config in, one JSON result (plus optional CSV) out.

Usage::

    python3 -m dunklsphere <command> --config cfg.json [--seed N] [--out DIR] [--csv]

The config is a JSON object.  The weight is given either by ``"kappa"`` (a
``Z_2^d`` multiplicity list, ``d = len(kappa)``), by ``"root_system"`` (a path
to a root-system text file, relative to the config) or by
``"root_system_text"`` (the same format inline).  Optional ``"tolerances"``
turn reported quantities into assertions (exit status 2 on failure).

Exit status: 0 success, 1 invalid config, 2 assertion failure, 3 infeasible.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .ball_entropy import BallSpec, entropy_bracket, schuett_value
from .cubature import CubatureInfeasible, build_rule, exactness_check, mz_check
from .harmonics import eta_n_apply, eta_n_apply_kernel, kernel_L, kernel_P
from .sphere import CapabilityError, DomainError, build_maximal_separated_set
from .weight import DunklWeight, admissible_betas, lemma31_ratio, parse_root_system

SCHEMA_VERSION = 1
COMMANDS = ("nodes", "cubature", "mz", "kernel", "lemma31", "ball-entropy",
            "sobolev-upper", "sobolev-lower", "rate")


class Tolerances:
    """Config tolerances; violations are collected rather than raised."""

    def __init__(self, spec: dict):
        self.spec = dict(spec)
        self.failures: list[str] = []

    def __contains__(self, key) -> bool:
        return key in self.spec

    def __getitem__(self, key):
        return self.spec[key]


def _num(x):
    """Map ``inf`` to the string ``"inf"`` so outputs stay strict JSON."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return _num(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float):
        return _num(obj)
    return obj


def _exponent(v) -> float:
    return float("inf") if isinstance(v, str) and v.strip().lower() in ("inf", "infinity") else float(v)


def load_weight(cfg: dict, base: Path) -> DunklWeight:
    if "root_system_text" in cfg:
        return DunklWeight(parse_root_system(cfg["root_system_text"]))
    if "root_system" in cfg:
        return DunklWeight(parse_root_system((base / cfg["root_system"]).read_text()))
    if "kappa" in cfg:
        kap = [float(k) for k in cfg["kappa"]]
        if "d" in cfg and int(cfg["d"]) != len(kap):
            raise DomainError("d does not match the length of kappa")
        return DunklWeight.z2d(kap)
    if "d" in cfg:
        return DunklWeight.unweighted(int(cfg["d"]))
    raise DomainError("config needs one of kappa, root_system, root_system_text or d")


def _pipeline_config(cfg: dict, w: DunklWeight) -> pl.PipelineConfig:
    kw = {}
    for key in ("rho", "beta", "c_lambda"):
        if key in cfg:
            kw[key] = float(cfg[key])
    return pl.PipelineConfig(float(cfg["r"]), _exponent(cfg["p"]), _exponent(cfg["q"]), w, **kw)


def _check(tol: Tolerances, key: str, value: float, le: bool = True) -> None:
    if key in tol:
        bound = float(tol[key])
        ok = value <= bound if le else value >= bound
        if not ok:
            tol.failures.append(f"{key}: measured {value:.6g} violates bound {bound:.6g}")


# ---------------------------------------------------------------------------
# commands; each returns (result dict, csv rows or None)
# ---------------------------------------------------------------------------


def cmd_nodes(cfg, w, seed, tol):
    S = build_maximal_separated_set(w.d, float(cfg["eps"]), seed)
    S.verify()
    return {"d": w.d, "eps": float(cfg["eps"]), "count": len(S), "separation": S.separation,
            "covering_radius": S.covering_radius, "points": S.points}, \
        [{"i": i, **{f"x{j}": float(c) for j, c in enumerate(p)}} for i, p in enumerate(S.points)]


def cmd_cubature(cfg, w, seed, tol):
    rule = build_rule(w, int(cfg["degree"]), float(cfg.get("delta", 0.25)),
                      float(cfg.get("tol", 1e-8)), seed)
    err = exactness_check(rule, trials=int(cfg.get("trials", 200)), seed=seed)
    _check(tol, "residual", rule.residual)
    _check(tol, "exactness", err)
    lo, hi = rule.weight_model_bracket
    _check(tol, "model_constant", max(hi, 1.0 / lo))
    rec = rule.to_record()
    rec["exactness_error"] = err
    rec["model_constant"] = max(hi, 1.0 / lo)
    rows = [{"i": i, **{f"x{j}": float(c) for j, c in enumerate(p)}, "weight": float(lam)}
            for i, (p, lam) in enumerate(zip(rule.points, rule.weights))]
    return rec, rows


def cmd_mz(cfg, w, seed, tol):
    n = int(cfg["n"])
    rule = build_rule(w, 3 * n, float(cfg.get("delta", 0.25)), seed=seed)
    rows = []
    for p in cfg.get("p_values", [1, 2, "inf"]):
        b = mz_check(rule, _exponent(p), int(cfg.get("trials", 200)), seed, n=n)
        rows.append({"p": b.p, "n": b.n, "c_low": b.c_low, "c_high": b.c_high})
        if math.isinf(b.p) or b.p == 1:
            _check(tol, "mz_high", b.c_high)
            _check(tol, "mz_low", b.c_low, le=False)
        if b.p == 2:
            _check(tol, "mz2_dev", max(abs(b.c_low - 1), abs(b.c_high - 1)))
    return {"n": n, "nodes": len(rule.weights), "degree": rule.exact_degree,
            "residual": rule.residual, "brackets": rows}, rows


def cmd_kernel(cfg, w, seed, tol):
    n = int(cfg["n"])
    rng = np.random.default_rng(seed)
    M = int(cfg.get("points", 8))
    x = rng.standard_normal((M, w.d))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = rng.standard_normal((M, w.d))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    P = np.atleast_1d(kernel_P(w, n, x, y))
    L = np.atleast_1d(kernel_L(w, n, x, y))
    # eta_n reproduces Pi_n: apply it to a random degree-n polynomial via both routes
    from .corpus import random_band_limited

    f = random_band_limited(w.d, 0, n, seed)
    spectral = eta_n_apply(f, w, n)
    via_kernel = eta_n_apply_kernel(f, w, n, x)
    repro = float(np.max(np.abs(spectral(x) - f(x))))
    routes = float(np.max(np.abs(via_kernel - f(x))))
    _check(tol, "reproduction", max(repro, routes))
    rows = [{"i": i, "P_n": float(a), "L_n": float(b)} for i, (a, b) in enumerate(zip(P, L))]
    return {"n": n, "x": x, "y": y, "P_n": P, "L_n": L, "reproduction_error_spectral": repro,
            "reproduction_error_kernel": routes}, rows


def cmd_lemma31(cfg, w, seed, tol):
    betas = [float(b) for b in cfg["betas"]] if "betas" in cfg else list(admissible_betas(w))
    ns = [int(n) for n in cfg.get("n_values", [8, 16, 32, 64])]
    rules = {n: build_rule(w, n, float(cfg.get("delta", 0.25)), seed=seed) for n in ns}
    rows, spreads = [], {}
    for b in betas:
        vals = [lemma31_ratio(rules[n], b, n) for n in ns]
        spreads[repr(b)] = max(vals) / min(vals)
        rows += [{"beta": b, "n": n, "ratio": v} for n, v in zip(ns, vals)]
        _check(tol, "spread", spreads[repr(b)])
    return {"betas": betas, "n_values": ns, "ratios": rows, "spread": spreads}, rows


def cmd_ball_entropy(cfg, w, seed, tol):
    rows = []
    for m in cfg["m_values"]:
        spec = BallSpec(int(m), _exponent(cfg["p"]), _exponent(cfg["q"]))
        for k in cfg["k_values"]:
            br = entropy_bracket(spec, int(k), seed=seed, restarts=int(cfg.get("restarts", 64)))
            rows.append({"m": int(m), "k": int(k), "lower": br.lower, "upper": br.upper,
                         "lower_method": br.lower_method, "upper_method": br.upper_method,
                         "schuett": schuett_value(int(k), int(m), spec.p, spec.q)})
    return {"p": _exponent(cfg["p"]), "q": _exponent(cfg["q"]), "brackets": rows}, rows


def cmd_sobolev_upper(cfg, w, seed, tol):
    pc = _pipeline_config(cfg, w)
    rows, scheds = [], []
    for n in cfg.get("n_grid", list(pc.n_grid)):
        val, parts = pl.upper_bound_value(int(n), pc, return_parts=True)
        rows.append({"n": int(n), "upper": val, "head": parts["head"],
                     "tail": parts["truncated_levels"] + parts["series_tail"]})
        scheds.append(parts["schedule"].to_record())
    return {"values": rows, "schedules": scheds}, rows


def cmd_sobolev_lower(cfg, w, seed, tol):
    pc = _pipeline_config(cfg, w)
    l = int(cfg.get("l", 8))
    sys_ = pl.build_bump_system(l, pc, seed)
    rep = pl.verify_bump_norms(sys_, pc.p, int(cfg.get("trials", 100)), seed,
                               leak_bumps=int(cfg.get("leak_bumps", 1)))
    c = rep.ratio_low
    rows = []
    for n in cfg.get("n_values", list(range(2, 13))):
        lo = pl.lower_bound_value(int(n), pc, embed_constant=c, seed=seed)
        up = pl.upper_bound_value(int(n), pc)
        rows.append({"n": int(n), "lower": lo, "upper": up, "ratio": lo / up})
    _check(tol, "leakage", rep.leakage)
    _check(tol, "norm_high", rep.ratio_high)
    _check(tol, "norm_low", rep.ratio_low, le=False)
    _check(tol, "sandwich", max(r["ratio"] for r in rows))
    return {"l": l, "N": sys_.N, "strip_measure": sys_.strip_measure(),
            "bump_report": vars(rep), "values": rows,
            "sandwich_constant": max(r["ratio"] for r in rows)}, rows


def cmd_rate(cfg, w, seed, tol):
    pc = _pipeline_config(cfg, w)
    grid = [int(n) for n in cfg.get("n_grid", list(pc.n_grid))]
    vals = [pl.upper_bound_value(n, pc) for n in grid]
    target = -pc.r / (pc.d - 1)
    rep = pl.rate_regression(grid, vals, target)
    _check(tol, "slope_error", abs(rep.slope - target))
    rows = []
    for i, (n, v) in enumerate(zip(grid, vals)):
        s = pl.rate_regression(grid[: i + 1], vals[: i + 1], target).slope if i >= 3 else float("nan")
        rows.append({"n": n, "upper": v, "lower": "", "slope_so_far": s})
    return rep.to_record(), rows


HANDLERS = {
    "nodes": cmd_nodes, "cubature": cmd_cubature, "mz": cmd_mz, "kernel": cmd_kernel,
    "lemma31": cmd_lemma31, "ball-entropy": cmd_ball_entropy, "sobolev-upper": cmd_sobolev_upper,
    "sobolev-lower": cmd_sobolev_lower, "rate": cmd_rate,
}


def dumps(result: dict) -> str:
    return json.dumps(_clean(result), sort_keys=True, indent=1, allow_nan=False) + "\n"


def _csv_text(rows) -> str:
    buf = io.StringIO()
    keys = list(rows[0].keys()) if rows else []
    wr = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    wr.writeheader()
    for r in rows:
        wr.writerow({k: repr(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in r.items()})
    return buf.getvalue()


def run(command: str, cfg: dict, seed: int = 0, out: Path | None = None, want_csv: bool = False,
        base: Path = Path(".")) -> tuple[int, dict]:
    """Execute one command; returns ``(exit status, result)`` and writes files under ``out``."""
    t0 = time.time()
    try:
        if command not in HANDLERS:
            raise DomainError(f"unknown command {command!r}")
        w = None if command == "ball-entropy" else load_weight(cfg, base)
        tol = Tolerances(cfg.get("tolerances", {}))
        result, rows = HANDLERS[command](cfg, w, seed, tol)
        status = 0
        if tol.failures:
            result["failures"] = tol.failures
            for msg in tol.failures:
                print(f"assertion failed: {msg}", file=sys.stderr)
            status = 2
    except (DomainError, CapabilityError, KeyError, ValueError, TypeError, OSError) as exc:
        msg = f"invalid config: {exc}"
        print(msg, file=sys.stderr)
        return 1, {"error": msg}
    except CubatureInfeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3, {"error": str(exc)}
    except AssertionError as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 2, {"error": str(exc)}
    result = {"schema_version": SCHEMA_VERSION, "command": command, "seed": int(seed), "result": result}
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{command}.json").write_text(dumps(result))
        (out / f"{command}.meta.json").write_text(json.dumps(
            {"elapsed_seconds": time.time() - t0, "finished_at": time.time()}, sort_keys=True) + "\n")
        if want_csv and rows:
            (out / f"{command}.csv").write_text(_csv_text(rows))
    return status, result


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="dunklsphere", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, type=Path)
    ap.add_argument("--seed", type=int, default=None, help="overrides the config's seed")
    ap.add_argument("--out", type=Path, default=None, help="output directory (stdout if omitted)")
    ap.add_argument("--csv", action="store_true", help="also write a CSV trace")
    args = ap.parse_args(argv)
    try:
        cfg = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    if seed < 0 or seed >= 2 ** 64:
        print("invalid config: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    status, result = run(args.command, cfg, seed, args.out, args.csv, args.config.parent)
    if args.out is None and status in (0, 2):
        sys.stdout.write(dumps(result))
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
