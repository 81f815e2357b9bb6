"""``bzl`` experiment runner.

Exit status: 0 on success, 2 when ``--strict`` and a checked contract fails,
1 on any error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .bergman import bergman_function, density_check, offdiag_decay_fit, tyz_ratio
from .cltlab import c2_limit_reference, c2_terms, run_ensemble, st_condition_c1
from .config import EXPERIMENTS, ExperimentConfig, load, validate
from .disc import Disc
from .errors import BzlError, ConfigParse
from .orthobasis import build_onb, default_quadrature
from .quadrature import build_polar_rule
from .weights import check_hypotheses, equilibrium_radial, from_spec, in_bulk
from .zerostats import TestFunction


def _c(p):
    return complex(p[0], p[1])


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path: Path, data):
    with open(path, "w", newline="\n") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(type(x))


def _quad_overrides(cfg):
    q = cfg.quadrature
    return {k: (None if v == "auto" else v) for k, v in q.items()}


def _basis(cfg, w, n):
    o = _quad_overrides(cfg)
    q = default_quadrature(w, n, o["R"], o["n_radial"], o["n_angular"])
    return build_onb(q, w, n), q


def _phi(cfg):
    return TestFunction(_c(cfg.test_function["center"]), cfg.test_function["radius"])


def _workers():
    try:
        return max(1, int(os.environ.get("BZL_THREADS", "1")))
    except ValueError:
        return 1


def run_kernel_diagnostics(cfg, out):
    w = from_spec(cfg.weight)
    rows, density, ok = [], {}, True
    for n in cfg.n:
        b, q = _basis(cfg, w, n)
        integral, dim = density_check(b, q)
        density[str(n)] = {"integral": integral, "dim": dim, "rel_error": abs(integral - dim) / dim}
        ok &= abs(integral - dim) / dim < 1e-6
        for p in cfg.probe_points:
            z = _c(p)
            tyz = tyz_ratio(b, z) if bool(in_bulk(w, n, z)) else float("nan")
            rows.append((n, z.real, z.imag, bergman_function(b, z), tyz))
    write_csv(out / "kernel.csv", ["n", "z_re", "z_im", "B_n", "tyz_ratio"], rows)
    write_json(out / "density.json", density)
    return ok, ["kernel.csv", "density.json"]


def run_decay_fit(cfg, out):
    w = from_spec(cfg.weight)
    rows, ok = [], True
    for n in cfg.n:
        b, _ = _basis(cfg, w, n)
        fit = offdiag_decay_fit(b, _c(cfg.base_point), _c(cfg.direction), cfg.radii)
        ok &= fit.T_fit > 0 and fit.r_squared > 0.9
        for r, rho in zip(fit.radii, fit.abs_rho):
            rows.append((n, r, rho, fit.T_fit, fit.C_fit, fit.r_squared))
    write_csv(out / "decay.csv", ["n", "r", "abs_rho", "fit_T", "fit_C", "r2"], rows)
    return ok, ["decay.csv"]


def run_equilibrium(cfg, out):
    w = from_spec(cfg.weight)
    results, rows = {}, []
    for n in cfg.n:
        eq = equilibrium_radial(w, n)
        rule = build_polar_rule(eq.outer_radius, 64, 64)
        mass = float(np.dot(rule.weights, eq.mass_density(rule.nodes)))
        results[str(n)] = {"inner_radius": eq.inner_radius, "outer_radius": eq.outer_radius, "mass": mass}
        for r in np.linspace(0, 2 * eq.outer_radius, 41)[1:]:
            rows.append((n, r, float(w.eval(n, r)), float(eq.eval(r)), float(eq.mass_density(r))))
    write_json(out / "equilibrium.json", results)
    write_csv(out / "profile.csv", ["n", "r", "phi", "phi_e", "mass_density"], rows)
    ok = all(abs(v["mass"] - 1) < 1e-3 for v in results.values())
    return ok, ["equilibrium.json", "profile.csv"]


def run_conditions(cfg, out):
    w = from_spec(cfg.weight)
    phi = _phi(cfg)
    X = Disc(_c(cfg.X["center"]), cfg.X["radius"])
    report = {"c2_reference": c2_limit_reference(phi), "n": {}}
    for n in cfg.n:
        b, _ = _basis(cfg, w, n)
        num, den = c2_terms(b, phi, grid_size=cfg.grid_size)
        report["n"][str(n)] = {
            "c1": st_condition_c1(b, X, cfg.grid_size),
            "c2": num / den,
            "c2_numerator": num,
            "c2_denominator": den,
        }
    write_json(out / "conditions.json", report)
    ok = all(v["c2"] > 0 for v in report["n"].values())
    return ok, ["conditions.json"]


def run_clt(cfg, out):
    w = from_spec(cfg.weight)
    phi = _phi(cfg)
    n = cfg.n[0]
    b, _ = _basis(cfg, w, n)
    s = run_ensemble(w, phi, n, cfg.trials, cfg.seed, dual_route=cfg.dual_route, basis=b, workers=_workers())
    num, den = c2_terms(b, phi, grid_size=cfg.grid_size)
    summary = dict(s.to_dict(), weight=cfg.weight, c1=den, c2=num / den, c2_reference=c2_limit_reference(phi))
    dual = s.max_dual_route_error
    summary["max_dual_route_error"] = dual
    write_json(out / "summary.json", summary)
    write_csv(out / "samples.csv", ["trial", "standardized"], enumerate(s.standardized))
    write_csv(
        out / "trials.csv",
        ["trial", "n", "statistic_rootsum", "statistic_log", "n_roots_in_support"],
        (
            (r["trial"], r["n"], r["statistic_rootsum"], "" if r["statistic_log"] is None else r["statistic_log"], r["n_roots_in_support"])
            for r in s.records
        ),
    )
    ok = dual is None or dual < 1e-3
    return ok, ["summary.json", "samples.csv", "trials.csv"]


def run_hypothesis_check(cfg, out):
    w = from_spec(cfg.weight)
    U = Disc(_c(cfg.U["center"]), cfg.U["radius"])
    report = check_hypotheses(w, cfg.n, U, cfg.R, cfg.epsilon)
    write_json(out / "hypothesis.json", dict(report.to_dict(), weight=cfg.weight))
    return report.all_ok, ["hypothesis.json"]


RUNNERS = {
    "kernel-diagnostics": run_kernel_diagnostics,
    "decay-fit": run_decay_fit,
    "equilibrium": run_equilibrium,
    "conditions": run_conditions,
    "clt-run": run_clt,
    "hypothesis-check": run_hypothesis_check,
}


def run_experiment(cfg: ExperimentConfig, strict: bool = False) -> int:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    ok, files = RUNNERS[cfg.experiment](cfg, out)
    manifest = {
        "experiment": cfg.experiment,
        "resolved_config": cfg.to_dict(),
        "seed": cfg.seed,
        "contract_ok": bool(ok),
        "files": files,
        "versions": {
            "bzl": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "wall_time_s": time.perf_counter() - start,
    }
    write_json(out / "manifest.json", manifest)
    return 2 if (strict and not ok) else 0


def build_parser():
    parser = argparse.ArgumentParser(prog="bzl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML config, JSON config or a previous manifest.json")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--strict", action="store_true", help="exit 2 when a checked contract fails")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config) if args.config else validate({})
        if args.config and cfg.experiment != args.experiment:
            raw = cfg.to_dict()
            raw["experiment"] = args.experiment
            cfg = validate(raw)
        cfg.experiment = args.experiment
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        if overrides:
            cfg = validate(dict(cfg.to_dict(), **overrides))
        return run_experiment(cfg, strict=args.strict)
    except ConfigParse as exc:
        print(f"bzl: config error: {exc}", file=sys.stderr)
        return 1
    except (BzlError, OSError, ValueError) as exc:
        print(f"bzl: {args.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
