"""Command line entry point: ``fracbec <command> ...``; results are JSON on stdout.

Couplings are given in units of a* unless ``--absolute`` is passed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import fieldfile
from .appendix import coupled_soliton, p_functional
from .classify import GAMMA_BAND, classify
from .constrained import SystemParams, minimize
from .errors import FracBECError
from .gamma import GAMMA_GRID, find_gamma_crossing, gamma_estimate
from .ground_state import DEFAULT_GRID, load_or_solve, solve_Q, verify_decay
from .options import SolverOptions
from .plots import emit_plots
from .potentials import parse_potential
from .probes import psi_r_slopes, scaling_probe, truncated_soliton
from .spectral import Grid1D
from .sweep import SweepTable, load_config, run_sweep
from .thresholds import compute_thresholds
from .verify import run_verification_suite


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(type(o).__name__)


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2, default=_json_default)
    sys.stdout.write("\n")


def _grid(args, default):
    return Grid1D(args.n or default.n, args.L or default.L)


def _params(args, a_star):
    s = 1.0 if args.absolute else a_star
    return SystemParams(args.a1 * s, args.a2 * s, args.beta * s,
                        parse_potential(args.v1), parse_potential(args.v2))


def _add_couplings(p, beta=True):
    p.add_argument("--a1", type=float, required=True)
    p.add_argument("--a2", type=float, required=True)
    if beta:
        p.add_argument("--beta", type=float, required=True)
    p.add_argument("--absolute", action="store_true", help="couplings are absolute, not in units of a*")
    p.add_argument("--v1", default="harmonic", help="potential of component 1, e.g. harmonic, power:4, shifted_well:2")
    p.add_argument("--v2", default="harmonic")


def _add_grid(p):
    p.add_argument("--n", type=int, help="grid points (power of two)")
    p.add_argument("--L", type=float, help="box half-length")


# --- commands -------------------------------------------------------------------

def cmd_ground_state(args):
    grid = _grid(args, DEFAULT_GRID)
    opts = SolverOptions(tol=args.tol, method=args.method)
    gs = solve_Q(grid, opts) if args.no_cache else load_or_solve(grid, opts)
    if args.save:
        fieldfile.save(gs.q, args.save)
    d = verify_decay(gs)
    _emit({
        "n": grid.n, "L": grid.L, "a_star": gs.a_star, "method": gs.method,
        "iterations": gs.iterations, "el_residual": gs.residual,
        "pohozaev": gs.pohozaev(), "pohozaev_residuals": gs.pohozaev_residuals(),
        "gn_constant": gs.gn_constant,
        "decay": {"verdict": d.verdict, "loglog_slope": d.loglog_slope, "bound_ratio": d.bound_ratio},
    })


def cmd_minimize(args):
    gs = load_or_solve()
    p = _params(args, gs.a_star)
    grid = _grid(args, Grid1D(2048, 16.0))
    res = minimize(p, grid, SolverOptions(tol=args.tol, max_iter=args.max_iter, seed=args.seed))
    if args.save:
        base = Path(args.save)
        fieldfile.save(res.u1, base.with_name(base.name + "_u1.frfld"))
        fieldfile.save(res.u2, base.with_name(base.name + "_u2.frfld"))
    _emit({"a_star": gs.a_star, "a1": p.a1, "a2": p.a2, "beta": p.beta, **res.summary()})


def cmd_classify(args):
    gs = load_or_solve()
    p = _params(args, gs.a_star)
    c = classify(p, gs, band=args.gamma_band, gamma="needed" if args.skip_gamma else "always")
    _emit({"a1": p.a1, "a2": p.a2, "beta": p.beta, **c.as_dict()})


def cmd_gamma(args):
    gs = load_or_solve()
    p = _params(args, gs.a_star)
    est = gamma_estimate(p, _grid(args, GAMMA_GRID), gs)
    _emit({"a_star": gs.a_star, "a1": p.a1, "a2": p.a2, "beta": p.beta, **est.as_dict(),
           "within_bounds": est.within_bounds()})


def cmd_crossing(args):
    gs = load_or_solve()
    s = 1.0 if args.absolute else gs.a_star
    a1, a2 = args.a1 * s, args.a2 * s
    trace = []
    beta = find_gamma_crossing(a1, a2, gs, _grid(args, GAMMA_GRID), trace=trace)
    th = compute_thresholds(a1, a2, gs.a_star)
    _emit({"a_star": gs.a_star, "a1": a1, "a2": a2, "beta_cross": beta,
           "beta_lower": th.beta_lower, "beta_upper": th.beta_upper,
           "trace": [{"beta": b, "gamma": g} for b, g in sorted(trace)]})


def _write_trace_csv(path, series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(["series", "lambda_or_R", "energy_or_term"])
        for name, xs, ys in series:
            for x, y in zip(xs, ys):
                w.writerow([name, format(float(x), ".17g"), format(float(y), ".17g")])


def cmd_probe(args):
    gs = load_or_solve()
    if args.kind == "scaling":
        p = _params(args, gs.a_star)
        grid = _grid(args, Grid1D(2048, 64.0))
        u = truncated_soliton(grid, gs)
        lams = np.geomspace(1.0, args.lambda_max, args.points)
        tr = scaling_probe(u, u, p, lams)
        out = {"kind": "scaling", "a1": p.a1, "a2": p.a2, "beta": p.beta,
               "decreasing": tr.is_decreasing(), "linear_coeff": tr.linear_coeff,
               "rho0": tr.rho0, "analytic_coeff": tr.analytic_coeff,
               "fitted_slope": tr.fitted_slope(),
               "energy_ratio": float(tr.energy[-1] / abs(tr.energy[0])) if tr.energy[0] else math.inf}
        series = [("energy", tr.lambdas, tr.energy)]
    else:
        grid = _grid(args, Grid1D(2048, 2.0))
        fit = psi_r_slopes(grid, gs, args.Rs)
        out = {"kind": "psi-r", "kinetic_slope": fit.kinetic_slope, "quartic_slope": fit.quartic_slope,
               "expected_kinetic": fit.expected_kinetic, "expected_quartic": fit.expected_quartic,
               "amp2": fit.amp2}
        series = [("kinetic", fit.Rs, fit.kinetic), ("quartic", fit.Rs, fit.quartic)]
    out["trace"] = [{"series": s, "lambda_or_R": float(x), "energy_or_term": float(y)}
                    for s, xs, ys in series for x, y in zip(xs, ys)]
    if args.csv:
        _write_trace_csv(args.csv, series)
    _emit(out)


def cmd_appendix(args):
    gs = load_or_solve()
    c = coupled_soliton(args.a, args.beta, gs, args.theta)
    d = c.as_dict()
    d["p_functional"] = p_functional(c.u0, c.v0, args.a)
    d["p_expected"] = gs.a_star / (2 * args.a)
    d["rho1_expected"] = gs.a_star / (args.a + args.beta)
    _emit(d)


def cmd_sweep(args):
    spec = load_config(args.config)
    table = run_sweep(spec, args.out, resume=args.resume, workers=args.workers)
    bad = table.inconsistent_rows(spec.gamma_band)
    _emit({"rows": len(table), "cells": spec.n_cells, "table": str(Path(args.out) / "sweep.csv"),
           "inconsistent_rows": [r.cell for r in bad]})
    return 1 if bad else 0


def cmd_verify(args):
    rep = run_verification_suite(args.level, sandwich=not args.no_sandwich)
    for line in rep.lines():
        print(line, file=sys.stderr)
    _emit(rep.as_dict())
    return 0 if rep.passed else 1


def cmd_plot(args):
    table = SweepTable.read(args.table)
    files = emit_plots(table, args.out)
    _emit({"files": [str(f) for f in files]})


def build_parser():
    ap = argparse.ArgumentParser(prog="fracbec", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ground-state", help="solve for Q and report a*")
    _add_grid(p)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--method", choices=["flow", "fixedpoint"], default="flow")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--save", help="write Q to this field file")
    p.set_defaults(func=cmd_ground_state)

    p = sub.add_parser("minimize", help="constrained minimizer of the two-component energy")
    _add_couplings(p)
    _add_grid(p)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--save", help="prefix for the two field files")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("classify", help="existence verdict at a parameter point")
    _add_couplings(p)
    p.add_argument("--gamma-band", type=float, default=GAMMA_BAND)
    p.add_argument("--skip-gamma", action="store_true", help="estimate Gamma only when no analytic rule applies")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("gamma", help="numeric Gamma with its bounds")
    _add_couplings(p)
    _add_grid(p)
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("crossing", help="first beta in [beta_lower, beta_upper] with Gamma = 1")
    _add_couplings(p, beta=False)
    _add_grid(p)
    p.set_defaults(func=cmd_crossing)

    p = sub.add_parser("probe", help="scaling or psi_R trial-state traces")
    p.add_argument("--kind", choices=["scaling", "psi-r"], required=True)
    p.add_argument("--a1", type=float, default=0.5)
    p.add_argument("--a2", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=0.7)
    p.add_argument("--absolute", action="store_true")
    p.add_argument("--v1", default="harmonic")
    p.add_argument("--v2", default="harmonic")
    _add_grid(p)
    p.add_argument("--lambda-max", type=float, default=1e3)
    p.add_argument("--points", type=int, default=31)
    p.add_argument("--Rs", type=float, nargs="+", default=[8, 16, 32, 64])
    p.add_argument("--csv", help="also write the trace as CSV")
    p.set_defaults(func=cmd_probe)

    p = sub.add_parser("appendix-verify", help="coupled soliton identities")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--theta", type=float)
    p.set_defaults(func=cmd_appendix)

    p = sub.add_parser("sweep", help="phase-diagram sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resume", action="store_true")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the verification suite")
    p.add_argument("--level", choices=["fast", "full"], default="fast")
    p.add_argument("--no-sandwich", action="store_true", help="skip the large critical-diagonal run")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plot", help="CSV slices and gnuplot scripts from a sweep table")
    p.add_argument("--table", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args) or 0
    except (FracBECError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
