"""Reproducible experiment runner.

Every module is exposed as a subcommand writing CSV/JSON artifacts with
a provenance header (config hash + version).  All randomness flows
through Philox streams keyed by the config seed, and the default
deterministic mode reduces in fixed order, so identical configs yield
byte-identical artifacts.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__, bounds
from .errors import ConfigError, StdMapLabError
from .rng import stream

TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------

SCHEMAS: Dict[str, Dict[str, type]] = {
    "lyapunov": {"lam": float, "grid": int, "steps": int, "seed": int, "out": str,
                 "kind": str, "renorm_every": int},
    "bounds": {"lambda_grid": str, "out": str},
    "lax": {"annuli": int, "lam": float, "sample": int, "seed": int, "out": str},
    "spectrum": {"period": int, "theta_samples": int, "seed": int, "out": str,
                 "selfadjoint": bool},
    "wspectrum": {"lax_k": int, "lam": float, "wgrid": int, "extent": float,
                  "seed": int, "out": str, "tol": float},
    "dos": {"base": str, "lam": float, "truncation": int, "seeds": int,
            "seed": int, "out": str},
    "thouless": {"mode": str, "lam": float, "truncation": int, "seeds": int,
                 "steps": int, "seed": int, "out": str},
    "detprod": {"potential": str, "truncation": int, "seed": int, "out": str},
    "jensen": {"case": str, "out": str},
    "harmonic": {"poisson_c": float, "n_max": int, "radius": float, "out": str},
    "wiener": {"base": str, "lambda_grid": str, "n_max": int, "truncation": int,
               "seeds": int, "out": str},
    "duality": {"base": str, "lambda_grid": str, "grid": int, "steps": int, "out": str},
    "diffusion": {"lam": float, "ensemble": int, "n_max": int, "seed": int, "out": str},
    "distribution": {"lam": float, "grid": int, "steps": int, "out": str},
    "herman": {"lam": float, "betas": int, "steps": int, "seed": int, "out": str},
    "suite": {"name": str, "quick": bool, "out": str},
}

COMMON = {"threads": int, "deterministic": bool, "config": str}


def resolve_config(cmd: str, args: argparse.Namespace) -> dict:
    """Merge defaults, config file and explicit CLI flags; reject unknown keys."""
    schema = dict(SCHEMAS[cmd])
    schema.update(COMMON)
    cfg = {k: v for k, v in vars(args).items()
           if k in schema and v is not None and k != "config"}
    if getattr(args, "config", None):
        try:
            with open(args.config) as f:
                file_cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config: {e}")
        unknown = set(file_cfg) - set(schema)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for k, v in file_cfg.items():
            cfg.setdefault(k, schema[k](v))
    cfg["subcommand"] = cmd
    cfg.setdefault("threads", 1)
    cfg.setdefault("deterministic", True)
    return cfg


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_csv(path: str, columns: List[str], rows, h: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(f"# stdmaplab v{__version__} config_hash={h}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(path: str, payload: dict, h: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    payload = {"version": __version__, "config_hash": h, **payload}
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=float)
        f.write("\n")


def parse_grid(text: str) -> np.ndarray:
    """'a:b:step' inclusive lambda grid."""
    try:
        a, b, s = (float(t) for t in text.split(":"))
    except ValueError:
        raise ConfigError(f"bad grid spec {text!r}; expected a:b:step")
    n = int(np.floor((b - a) / s + 1e-9)) + 1
    return a + s * np.arange(n)


# ---------------------------------------------------------------------------
# Subcommand handlers (each returns a dict of artifact paths)
# ---------------------------------------------------------------------------

def run_lyapunov(cfg: dict, h: str) -> dict:
    from .cocycle import Cocycle2, grid_lyapunov
    from .diagnostics import standard_base

    lam = cfg.get("lam", 10.0)
    g = cfg.get("grid", 40)
    n = cfg.get("steps", 100000)
    kind = cfg.get("kind", "jacobian")
    c = Cocycle2(E=2.0 if kind == "jacobian" else 0.0, lam=lam,
                 base=standard_base(lam), kind=kind)
    ga = grid_lyapunov(c, g, n, renorm_every=cfg.get("renorm_every", 16))
    out = cfg.get("out", "out/lyapunov")
    rows = [(i, j, ga.grid[i, j]) for i in range(g) for j in range(g)]
    write_csv(f"{out}_grid.csv", ["ix", "iy", "exponent"], rows, h)
    write_json(f"{out}_summary.json", {
        "lam": lam, "mean": ga.mean, "excess_over_log_half_lam": ga.mean - np.log(lam / 2.0),
        "invalid_cells": ga.invalid_cells, "steps": n, "grid": g}, h)
    return {"grid": f"{out}_grid.csv", "summary": f"{out}_summary.json"}


def run_bounds(cfg: dict, h: str) -> dict:
    lams = parse_grid(cfg.get("lambda_grid", "0.5:12:0.1"))
    rows = []
    for lam in lams:
        lo = bounds.entropy_lower(lam)
        rows.append((lam, bounds.M(0.0, lam), bounds.C_lambda(lam),
                     bounds.C_E(2.0, lam), bounds.hadamard_c(2.0, lam),
                     lo, np.log(lam / 2.0) + bounds.C_E(2.0, lam),
                     bounds.pesin_lower(lam) if lam > bounds.lambda0() else float("nan")))
    out = cfg.get("out", "out/bounds")
    write_csv(f"{out}_table.csv",
              ["lambda", "M0", "C", "C_E2", "hadamard_E2",
               "entropy_lower", "entropy_upper", "pesin_lower"], rows, h)
    write_json(f"{out}_summary.json", {"lambda0": bounds.lambda0()}, h)
    return {"table": f"{out}_table.csv"}


def run_lax(cfg: dict, h: str) -> dict:
    from .lax import permutation_experiment

    n = cfg.get("annuli", 9)
    lam = cfg.get("lam", 4.0)
    sample = cfg.get("sample", 2000)
    vals = permutation_experiment(n, lam, sample, stream(cfg.get("seed", 0), 1))
    out = cfg.get("out", "out/lax")
    write_csv(f"{out}_exceedance.csv", ["rank", "exceedance"],
              list(enumerate(vals)), h)
    write_json(f"{out}_summary.json", {
        "annuli": n, "lam": lam, "count": len(vals),
        "negative_fraction": float(np.mean(vals < 0)),
        "mean": float(np.mean(vals)), "min": float(vals[0]), "max": float(vals[-1])}, h)
    return {"exceedance": f"{out}_exceedance.csv"}


def run_spectrum(cfg: dict, h: str) -> dict:
    from .jacobi import PeriodicJacobi, spectrum_curves

    p = cfg.get("period", 4)
    rng = stream(cfg.get("seed", 0), 2)
    if cfg.get("selfadjoint", False):
        J = PeriodicJacobi(a=np.ones(p), b=rng.normal(size=p), c=np.ones(p))
    else:
        J = PeriodicJacobi(a=rng.normal(size=p) + 1j * rng.normal(size=p),
                           b=rng.normal(size=p) + 1j * rng.normal(size=p),
                           c=rng.normal(size=p) + 1j * rng.normal(size=p))
    sc = spectrum_curves(J, cfg.get("theta_samples", 256))
    rows = []
    for i, th in enumerate(sc.theta):
        for cid in range(J.p):
            z = sc.curves[i, cid]
            rows.append((z.real, z.imag, th, cid))
    out = cfg.get("out", "out/spectrum")
    write_csv(f"{out}_curves.csv", ["re", "im", "theta", "curve_id"], rows, h)
    return {"curves": f"{out}_curves.csv"}


def run_wspectrum(cfg: dict, h: str) -> dict:
    from .diagnostics import standard_base
    from .jacobi import w_spectrum_scan
    from .lax import lax_approximate, seed_with_period

    k = cfg.get("lax_k", 7)
    lam = cfg.get("lam", 2.1)
    # non-cyclic approximant: a seed of period ~k gives the 2k-curvelet band
    # picture; cyclic approximants have period k^2 and exponentially thin bands
    base = lax_approximate(standard_base(lam), k, cyclic=False)
    scan = w_spectrum_scan(base, lam, grid=cfg.get("wgrid", 300),
                           extent=cfg.get("extent", 2.0),
                           seed=seed_with_period(base, k),
                           tol=cfg.get("tol", 0.02))
    rows = []
    g = scan.indicator.shape[0]
    for i in range(g):
        for j in range(g):
            if scan.indicator[i, j]:
                rows.append((scan.wgrid_re[i, j], scan.wgrid_im[i, j], 1))
    out = cfg.get("out", "out/wspectrum")
    write_csv(f"{out}_bands.csv", ["re", "im", "indicator"], rows, h)
    write_json(f"{out}_summary.json", {
        "lax_k": k, "lam": lam, "band_count": scan.band_count,
        "grid": g, "cells_in_spectrum": len(rows)}, h)
    return {"bands": f"{out}_bands.csv"}


def _base_from_name(name: str, lam: float):
    from .diagnostics import mathieu_base, standard_base
    if name == "mathieu":
        return mathieu_base()
    if name == "stdmap":
        return standard_base(lam)
    raise ConfigError(f"unknown base {name!r} (mathieu|stdmap)")


def run_dos(cfg: dict, h: str) -> dict:
    from .cocycle import grid_seeds
    from .potential import dos_from_streams, potential_streams

    lam = cfg.get("lam", 4.0)
    base = _base_from_name(cfg.get("base", "mathieu"), lam)
    N = cfg.get("truncation", 400)
    m = cfg.get("seeds", 50)
    g = int(np.ceil(np.sqrt(m)))
    X, Y = grid_seeds(g)
    seeds = list(zip(X.ravel()[:m], Y.ravel()[:m]))
    dk = dos_from_streams(potential_streams(base, lambda xs: lam * np.cos(xs), seeds, N))
    out = cfg.get("out", "out/dos")
    rows = [(z.real, z.imag, w) for z, w in zip(dk.atoms, dk.weights)]
    write_csv(f"{out}_atoms.csv", ["re", "im", "weight"], rows, h)
    return {"atoms": f"{out}_atoms.csv"}


def run_thouless(cfg: dict, h: str) -> dict:
    from .acceptance import _seven_cycle
    from .diagnostics import mathieu_base
    from .dynamics import Identity
    from .potential import thouless_residual, thouless_w_residual

    mode = cfg.get("mode", "scalar")
    out = cfg.get("out", "out/thouless")
    if mode == "scalar":
        lam = cfg.get("lam", 4.0)
        base = mathieu_base() if lam > 0 else Identity()
        rep = thouless_residual(base, lam, [4.0j], N=cfg.get("truncation", 400),
                                m=cfg.get("seeds", 50), n_steps=cfg.get("steps", 10000))
    elif mode == "w":
        lam = cfg.get("lam", 4.0)
        base = _seven_cycle()
        hh = TWO_PI / 7
        seeds = [((j + 0.5) / 8 * hh, 1.0) for j in range(8)]
        ws = np.concatenate([0.5 * np.exp(1j * np.arange(32) / 32 * TWO_PI),
                             1.5 * np.exp(1j * np.arange(32) / 32 * TWO_PI)])
        rep = thouless_w_residual(base, lam, ws, seeds, n_theta=128)
    else:
        raise ConfigError(f"unknown thouless mode {mode!r}")
    rows = [(z.real, z.imag, l, r, abs(l - r))
            for z, l, r in zip(rep.grid, rep.lhs, rep.rhs)]
    write_csv(f"{out}_residuals.csv", ["re", "im", "lhs", "rhs", "residual"], rows, h)
    write_json(f"{out}_summary.json", {"mode": mode, "sup_residual": rep.sup_residual}, h)
    return {"residuals": f"{out}_residuals.csv"}


def run_detprod(cfg: dict, h: str) -> dict:
    from .potential import product_formula_residual

    kind = cfg.get("potential", "constant")
    N = cfg.get("truncation", 400)
    if kind == "constant":
        V1 = V2 = np.full(N + 4, 5.0)
    elif kind == "period4":
        rng = stream(cfg.get("seed", 0), 3)
        reps = N // 4 + 2
        V1 = np.tile(rng.normal(size=4) * 1.5, reps)
        V2 = np.tile(rng.normal(size=4) * 1.5, reps)
    else:
        raise ConfigError(f"unknown potential {kind!r}")
    res = product_formula_residual(V1, V2, N=N)
    out = cfg.get("out", "out/detprod")
    write_json(f"{out}.json", res, h)
    return {"report": f"{out}.json"}


def run_jensen(cfg: dict, h: str) -> dict:
    from .acceptance import crit_jensen

    res = crit_jensen()
    out = cfg.get("out", "out/jensen")
    write_json(f"{out}.json", {"passed": res.passed, **res.details}, h)
    return {"report": f"{out}.json"}


def run_harmonic(cfg: dict, h: str) -> dict:
    from .complexan import harmonic_continuation, poisson_series

    c = cfg.get("poisson_c", 0.5)
    series = poisson_series(c, cfg.get("n_max", 60))
    r = cfg.get("radius", 1.5)
    rows = []
    for th in np.arange(128) / 128 * TWO_PI:
        res = harmonic_continuation(series, r * np.exp(1j * th))
        rows.append((th, res["alpha"]))
    out = cfg.get("out", "out/harmonic")
    write_csv(f"{out}_alpha.csv", ["theta", "alpha"], rows, h)
    return {"alpha": f"{out}_alpha.csv"}


def run_wiener(cfg: dict, h: str) -> dict:
    from .cocycle import grid_seeds
    from .diagnostics import wiener_test

    name = cfg.get("base", "mathieu")
    lams = parse_grid(cfg.get("lambda_grid", "0.5:8:0.75"))
    n_max = cfg.get("n_max", 10000)
    N = cfg.get("truncation", 400)
    m = cfg.get("seeds", 8)
    g = int(np.ceil(np.sqrt(m)))
    X, Y = grid_seeds(g)
    rows = []
    for lam in lams:
        base = _base_from_name(name, lam)
        if name == "mathieu":
            seeds = [((j + 0.5) / m * TWO_PI, 0.0) for j in range(m)]
        else:
            seeds = list(zip(X.ravel()[:m], Y.ravel()[:m]))
        rep = wiener_test(base, lam, n_max, N, seeds)
        rows.append((lam, rep.point_mass_estimate))
    out = cfg.get("out", f"out/wiener_{name}")
    write_csv(f"{out}.csv", ["lambda", "s_nmax"], rows, h)
    return {"sweep": f"{out}.csv"}


def run_duality(cfg: dict, h: str) -> dict:
    from .diagnostics import aubry_gap, mathieu_base, standard_base

    name = cfg.get("base", "stdmap")
    lams = parse_grid(cfg.get("lambda_grid", "2.5:10:0.5"))
    g = cfg.get("grid", 16)
    n = cfg.get("steps", 20000)
    builder = (lambda l: mathieu_base()) if name == "mathieu" else (lambda l: standard_base(l))
    rows = [(lam, aubry_gap(builder, lam, g=g, n=n)) for lam in lams]
    out = cfg.get("out", f"out/duality_{name}")
    write_csv(f"{out}.csv", ["lambda", "gap"], rows, h)
    return {"sweep": f"{out}.csv"}


def run_diffusion(cfg: dict, h: str) -> dict:
    from .diagnostics import diffusion

    lam = cfg.get("lam", 10.0)
    rep = diffusion(lam, cfg.get("ensemble", 2000), cfg.get("n_max", 1000),
                    stream(cfg.get("seed", 0), 4))
    out = cfg.get("out", "out/diffusion")
    write_csv(f"{out}_var.csv", ["n", "var_s"],
              list(zip(rep.ns, rep.var_s)), h)
    write_json(f"{out}_summary.json", {
        "lam": lam, "beta": rep.beta, "beta_lo": rep.beta_band[0],
        "beta_hi": rep.beta_band[1], "reconstruction_error": rep.reconstruction_error}, h)
    return {"var": f"{out}_var.csv"}


def run_distribution(cfg: dict, h: str) -> dict:
    from .diagnostics import lyapunov_cdf

    lam = cfg.get("lam", 2.0)
    rep = lyapunov_cdf(lam, cfg.get("grid", 40), cfg.get("steps", 100000))
    out = cfg.get("out", f"out/distribution_lam{lam:g}")
    m = len(rep.values)
    rows = [(rep.values[i], (i + 1) / m) for i in range(m)]
    write_csv(f"{out}_cdf.csv", ["value", "cdf"], rows, h)
    write_json(f"{out}_summary.json", {"lam": lam, "atom_at_zero": rep.atom_at_zero}, h)
    return {"cdf": f"{out}_cdf.csv"}


def run_herman(cfg: dict, h: str) -> dict:
    from .cocycle import herman_scan

    lam = cfg.get("lam", 10.0)
    nb = cfg.get("betas", 64)
    betas = np.arange(nb) / nb * TWO_PI
    hs = herman_scan(lam, betas, n=cfg.get("steps", 20000),
                     seed_rng=stream(cfg.get("seed", 0), 5))
    out = cfg.get("out", "out/herman")
    rows = list(zip(hs.betas, hs.exponents, hs.uniform))
    write_csv(f"{out}.csv", ["beta", "exponent", "uniform"], rows, h)
    return {"scan": f"{out}.csv"}


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def _suite_acceptance(cfg: dict, h: str) -> int:
    from .acceptance import run_all

    out = cfg.get("out", "out/acceptance")
    results = run_all()
    write_json(f"{out}_verdicts.json", {
        "criteria": [{"name": r.name, "passed": r.passed, "runtime_s": r.runtime_s,
                      "details": r.details} for r in results],
        "all_passed": all(r.passed for r in results)}, h)
    _acceptance_artifacts(out, h)
    return 0 if all(r.passed for r in results) else 1


def _acceptance_artifacts(out: str, h: str) -> None:
    """Figure-grade CSVs regenerated alongside the acceptance verdicts."""
    from .diagnostics import standard_base
    from .dynamics import TorusPoint, orbit

    # orbit portrait at lam = 3.4 (several seeds; island + chaotic sea)
    base = standard_base(3.4)
    rows = []
    for i, (x0, y0) in enumerate([(np.pi + 0.01, np.pi), (np.pi + 0.3, np.pi),
                                  (0.5, 0.5), (1.0, 2.0), (2.0, 4.0), (4.0, 1.0)]):
        pts = orbit(TorusPoint(x0, y0), base, 3000)
        rows += [(p[0], p[1], i) for p in pts]
    write_csv(f"{out}_orbit.csv", ["x", "y", "seed_id"], rows, h)

    run_bounds({"lambda_grid": "0.5:12:0.1", "out": f"{out}_bounds"}, h)
    run_wiener({"base": "mathieu", "lambda_grid": "0.5:8:0.75", "n_max": 2000,
                "truncation": 200, "seeds": 6, "out": f"{out}_wiener_mathieu"}, h)
    run_wiener({"base": "stdmap", "lambda_grid": "0.5:8:0.75", "n_max": 2000,
                "truncation": 200, "seeds": 9, "out": f"{out}_wiener_stdmap"}, h)
    run_wspectrum({"lax_k": 7, "lam": 2.1, "wgrid": 300, "out": f"{out}_wspectrum"}, h)
    run_lax({"annuli": 9, "lam": 4.0, "sample": 1500, "seed": 0, "out": f"{out}_perm"}, h)
    run_distribution({"lam": 2.0, "grid": 40, "steps": 30000,
                      "out": f"{out}_cdf_lam2"}, h)
    run_distribution({"lam": 10.0, "grid": 40, "steps": 30000,
                      "out": f"{out}_cdf_lam10"}, h)


def _suite_invariants(cfg: dict, h: str) -> int:
    """Quick machine-checkable battery of the cross-module invariants."""
    import subprocess

    out = cfg.get("out", "out/invariants")
    args = [sys.executable, "-m", "pytest", "-q", "-x", "tests",
            "-k", "not acceptance"]
    if cfg.get("quick", False):
        args += ["-m", "not slow"]
    proc = subprocess.run(args, capture_output=True, text=True,
                          cwd=os.path.dirname(os.path.dirname(os.path.dirname(
                              os.path.abspath(__file__)))))
    write_json(f"{out}_verdict.json", {
        "returncode": proc.returncode,
        "tail": proc.stdout.splitlines()[-15:]}, h)
    sys.stdout.write(proc.stdout[-2000:])
    return proc.returncode


def run_suite(cfg: dict, h: str) -> int:
    name = cfg.get("name", "")
    if name == "acceptance":
        return _suite_acceptance(cfg, h)
    if name == "invariants":
        return _suite_invariants(cfg, h)
    raise ConfigError(f"unknown suite {name!r} (acceptance|invariants)")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

HANDLERS: Dict[str, Callable[[dict, str], object]] = {
    "lyapunov": run_lyapunov, "bounds": run_bounds, "lax": run_lax,
    "spectrum": run_spectrum, "wspectrum": run_wspectrum, "dos": run_dos,
    "thouless": run_thouless, "detprod": run_detprod, "jensen": run_jensen,
    "harmonic": run_harmonic, "wiener": run_wiener, "duality": run_duality,
    "diffusion": run_diffusion, "distribution": run_distribution,
    "herman": run_herman,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stdmaplab",
                                 description="standard-map spectral laboratory")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    flag_names = {
        "lam": "--lambda", "lambda_grid": "--lambda-grid", "lax_k": "--lax-k",
        "n_max": "--n-max", "poisson_c": "--poisson-c", "steps": "--steps",
    }
    for cmd, schema in SCHEMAS.items():
        p = sub.add_parser(cmd)
        for key, typ in schema.items():
            flag = flag_names.get(key, "--" + key.replace("_", "-"))
            if typ is bool:
                p.add_argument(flag, dest=key, action="store_true", default=None)
            else:
                p.add_argument(flag, dest=key, type=typ, default=None)
        for key, typ in COMMON.items():
            if key == "config":
                p.add_argument("--config", type=str, default=None)
            elif typ is bool:
                p.add_argument("--" + key, dest=key, action="store_true", default=None)
            else:
                p.add_argument("--" + key, dest=key, type=typ, default=None)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        cfg = resolve_config(args.cmd, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    h = config_hash(cfg)
    try:
        if args.cmd == "suite":
            return int(run_suite(cfg, h))
        artifacts = HANDLERS[args.cmd](cfg, h)
        for k, v in artifacts.items():
            print(f"{k}: {v}")
        return 0
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except StdMapLabError as e:
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
