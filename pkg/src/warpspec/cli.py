"""Command-line entry point: ``analyze``, ``bounds``, ``scan`` and ``report``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 hypothesis infeasible (the failing predicate is printed).
"""

from __future__ import annotations

import argparse
import csv
import glob
import itertools
import math
import os
import sys
from typing import Dict, List, Sequence

import numpy as np

from .config import ConfigError, RunConfig
from .energy import (EnergyParams, InfeasibleHypothesis, PreconditionViolation, build_trace,
                     certify_monotone, check_feasibility, growth_verdict, initial_positivity,
                     measure_c2, select_alpha)
from .gauge import Gauge, transform
from .geometry import DomainError, GaugeFitError, fit_gauge
from .radial import AngularMode, IntegrationError, separate, shoot
from .scan import ScanConfig, candidates, scan
from .thresholds import BoundInput, bounds, crossover

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2, 3


def fmt(v) -> str:
    """Locale-free, fixed-precision rendering used in every CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path: str, header: Sequence[str], rows, trailer: Sequence[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
        for line in trailer:
            fh.write(line + "\n")


def _outdir(cfg: RunConfig) -> str:
    out = cfg.output_dir()
    os.makedirs(out, exist_ok=True)
    return out


# --------------------------------------------------------------------------
# analyze


def run_analyze(cfg: RunConfig) -> Dict[str, object]:
    """Full pipeline for one ``(model, potential, mode, lambda)``; returns the verdict record."""
    model = cfg.model.build()
    pot = cfg.potential.build()
    es = cfg.energy
    R, R_max = es.r_inner(model.r0), es.R_max
    if not model.r0 <= R < R_max:
        raise ConfigError("energy.R must satisfy r0 <= R < R_max")
    eq = separate(model, pot, es.lam, AngularMode(cfg.mode.l, model.n))
    # a little room past R_max for the finite-difference stencil
    sol = shoot(eq, R_max * 1.01 + 1.0, seed=es.seed, tol=es.tol)

    gs = cfg.gauge
    fit_grid = np.geomspace(R, R_max, 256)
    try:
        fit = fit_gauge(model, fit_grid, None if gs.b == "fit" else float(gs.b),
                        None if gs.c == "fit" else float(gs.c))
    except ValueError as exc:
        raise ConfigError(f"energy.R .. energy.R_max: {exc}") from exc
    delta = fit.delta if gs.delta == "fit" else float(gs.delta)
    gauge = Gauge(fit.b, fit.c)

    def opt(v):
        return None if v == "auto" else float(v)

    params = EnergyParams(lam=es.lam, m=es.m, s=opt(es.s), q_choice=es.q_choice, mu=es.mu,
                          delta=delta, eps=opt(es.eps), alpha=opt(es.alpha), s0=opt(es.s0))
    ts = transform(sol, gauge, params.m)
    grid = np.linspace(R, R_max, es.trace_points)
    trace = build_trace(ts, model, gauge, params, grid)
    feas = check_feasibility(ts, model, gauge, params, R, R_max)
    alpha = select_alpha(ts, model, gauge, params, grid)

    rec: Dict[str, object] = {
        "gauge_b": fit.b, "gauge_c": fit.c, "delta_hat": fit.delta, "delta_used": delta,
        "a": feas["a"], "gcons": feas["gcons"], "gconl": feas["gconl"],
        "s": params.s_value, "s0": params.s0_value, "alpha": alpha,
        "c2": measure_c2(ts, model, gauge, params, grid),
    }
    failing = [k for k in ("gcons", "gconl") if not feas[k]]
    try:
        cert = certify_monotone(ts, model, gauge, params, R, R_max)
        rec["monotone_verdict"] = cert.verdict
        rec["first_violation_r"] = cert.first_violation_r
        rec["monotone_s"] = cert.s
    except InfeasibleHypothesis as exc:
        rec["monotone_verdict"] = f"infeasible:{exc.predicate}"
        rec["first_violation_r"] = None
        rec["monotone_s"] = None
        if exc.predicate not in failing:
            failing.append(exc.predicate)
    try:
        pos = initial_positivity(ts, model, gauge, params, R, R_max)
        rec["initial_positivity_r"] = pos.found_r
        rec["gq_margin"] = pos.gq_margin
    except PreconditionViolation as exc:
        rec["initial_positivity_r"] = f"precondition:{exc.predicate}"
        rec["gq_margin"] = exc.value
    if R_max >= 10.0 * R:
        gv = growth_verdict(sol, model, params.mu, (R, R_max))
        rec["growth_verdict"] = gv.verdict
        rec["fitted_floor"] = gv.fitted_floor
    else:
        rec["growth_verdict"] = "window_below_one_decade"
        rec["fitted_floor"] = math.nan
    rec["max_residual"] = float(np.max(trace.residual))
    rec["derivative_mismatch"] = trace.derivative_mismatch()
    rec["essential_spectrum_bottom"] = 0.25 * fit.b * fit.b
    rec["essential_spectrum_note"] = "known, not computed: [b^2/4, inf) when mean curvature tends to b"
    rec["failing"] = ";".join(failing)
    return {"trace": trace, "verdicts": rec}


def cmd_analyze(cfg: RunConfig) -> int:
    result = run_analyze(cfg)
    out = _outdir(cfg)
    trace = result["trace"]
    write_csv(os.path.join(out, "trace.csv"), trace.COLUMNS, zip(*trace.columns()))
    rec = result["verdicts"]
    write_csv(os.path.join(out, "verdicts.csv"), ("key", "value"), rec.items())
    if rec["failing"]:
        print(f"hypothesis infeasible: {rec['failing']}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"growth_verdict={fmt(rec['growth_verdict'])} "
          f"monotone_verdict={fmt(rec['monotone_verdict'])}")
    return EXIT_OK


# --------------------------------------------------------------------------
# bounds


BOUNDS_COLUMNS = ("n", "kappa", "a", "b", "c", "delta", "mu", "E0", "E1", "E2", "feasible_flags")


def bounds_rows(cfg: RunConfig):
    bs = cfg.bounds
    kappas = bs.kappa or [None]
    rows = []
    for n, kappa, a, b, c, d, mu in itertools.product(bs.n, kappas, bs.a, bs.b, bs.c,
                                                      bs.delta, bs.mu):
        inp = BoundInput(int(n), b, c, d, mu, a, kappa)
        res = bounds(inp)
        flags = ";".join(f"{k}={fmt(v)}" for k, v in res.feasible.items())
        rows.append((int(n), kappa, a, b, c, d, mu, res.E0, res.E1, res.E2, flags))
    return rows


def cmd_bounds(cfg: RunConfig) -> int:
    rows = bounds_rows(cfg)
    trailer = []
    flat_b = sorted({b for b in cfg.bounds.b if b > 0}) if not cfg.bounds.kappa else []
    for b in flat_b:
        trailer.append(f"# crossover b={fmt(b)} delta={fmt(crossover(b))}")
    write_csv(os.path.join(_outdir(cfg), "bounds.csv"), BOUNDS_COLUMNS, rows, trailer)
    for line in trailer:
        print(line[2:])
    return EXIT_OK


# --------------------------------------------------------------------------
# scan


SCAN_COLUMNS = ("lambda", "tail_slope", "l2_tail", "class", "excluded_by")


def cmd_scan(cfg: RunConfig) -> int:
    model = cfg.model.build()
    pot = cfg.potential.build()
    sc = cfg.scan
    scfg = ScanConfig((sc.lambda_min, sc.lambda_max), sc.steps, AngularMode(cfg.mode.l, model.n),
                      sc.r_max, sc.decay_criterion, sc.refine, sc.tol,
                      r_match=None if sc.r_match == "auto" else float(sc.r_match))
    try:
        scfg.validate(model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    results = scan(model, pot, scfg)
    cands = candidates(results)
    failed = sum(r.classification == "failed" for r in results)
    flagged = sum(bool(r.excluded_by) for r in results)
    summary = (f"scan_summary candidates={len(cands)} points={len(results)} "
               f"failed={failed} contradictions={flagged}")
    rows = [(r.lam, r.tail_slope, r.l2_tail, r.classification, r.excluded_by) for r in results]
    write_csv(os.path.join(_outdir(cfg), "scan.csv"), SCAN_COLUMNS, rows, ["# " + summary])
    print(summary)
    return EXIT_OK


# --------------------------------------------------------------------------
# report


def _read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        lines = fh.read().split("\n")
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    notes = [ln[2:] for ln in lines if ln.startswith("# ")]
    rows = list(csv.reader(body))
    return rows[0], rows[1:], notes


def _table(header, rows) -> List[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    out += ["| " + " | ".join(r) + " |" for r in rows]
    return out


def cmd_report(directory: str) -> int:
    if not os.path.isdir(directory):
        raise ConfigError(f"no such directory: {directory}")
    lines = ["# warpspec report", ""]
    found = False
    for name in ("verdicts", "bounds", "scan", "trace"):
        path = os.path.join(directory, f"{name}.csv")
        if not os.path.exists(path):
            continue
        found = True
        header, rows, notes = _read_csv(path)
        lines.append(f"## {name}")
        lines.append("")
        if name == "trace":
            cols = list(zip(*rows)) if rows else []
            stats = []
            for h, col in zip(header, cols):
                vals = np.array([float(x) for x in col])
                stats.append([h, fmt(float(np.min(vals))), fmt(float(np.max(vals)))])
            lines += [f"{len(rows)} samples.", ""] + _table(["column", "min", "max"], stats)
        elif name == "scan":
            keep = [r for r in rows if r[3] == "decaying"]
            lines += [f"{len(rows)} points, {len(keep)} decaying.", ""]
            if keep:
                lines += _table(header, keep)
        else:
            lines += _table(header, rows)
        for note in notes:
            lines += ["", note]
        lines.append("")
    if not found:
        raise ConfigError(f"no CSV outputs in {directory}")
    extra = sorted(set(glob.glob(os.path.join(directory, "*.csv")))
                   - {os.path.join(directory, f"{n}.csv")
                      for n in ("verdicts", "bounds", "scan", "trace")})
    for path in extra:
        lines.append(f"(ignored {os.path.basename(path)})")
    target = os.path.join(directory, "report.md")
    with open(target, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines).rstrip("\n") + "\n")
    print(target)
    return EXIT_OK


# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="warpspec", description="Spectral diagnostics on warped-product ends.")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, helptext in (("analyze", "energy pipeline for one spectral parameter"),
                           ("bounds", "threshold comparison table"),
                           ("scan", "shooting scan over a parameter grid")):
        sp = sub.add_parser(verb, help=helptext)
        sp.add_argument("config")
    sp = sub.add_parser("report", help="merge CSV outputs into report.md")
    sp.add_argument("directory")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.verb == "report":
            return cmd_report(args.directory)
        cfg = RunConfig.load(args.config)
        return {"analyze": cmd_analyze, "bounds": cmd_bounds, "scan": cmd_scan}[args.verb](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, GaugeFitError, DomainError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
