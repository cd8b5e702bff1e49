"""Command-line front end.

Subcommands::

    beamswarm solve CONFIG      swarm solve per case (+ oracle cross-check)
    beamswarm oracle CONFIG     Newton oracle only
    beamswarm sweeps            built-in load sweeps on a uniform and a tapered beam
    beamswarm compare SUMMARY MEASURED
    beamswarm gen-widths --lower L --upper U --knots K --seed S

Every output file is comma-separated with a header row and LF endings; the
first column is ``format_version``. Output quantities are SI (m, N, N*m,
rad) whatever units the config uses.

Exit status: 0 all good, 1 usage/IO/config error, 2 some case failed to
converge (files are still written) or compare skipped rows.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from importlib import resources

from . import __version__
from .beam import generate_random_widths, integrate_deflection
from .config import FORMAT_VERSION, ConfigError, RunConfig, load_config, parse_config
from .oracle import OracleError, reference_solve
from .solver import derive_seed, normalized_tip_error, solve_tip_locus

log = logging.getLogger("beamswarm")

SUMMARY_COLUMNS = [
    "format_version", "case_id", "F0", "phi", "M0", "Qx", "Qy", "theta0", "fitness",
    "iterations", "converged", "oracle_Qx", "oracle_Qy", "oracle_theta0", "pso_vs_oracle_error", "length_l",
]
ORACLE_COLUMNS = [
    "format_version", "case_id", "F0", "phi", "M0", "Qx", "Qy", "theta0",
    "residual_norm", "newton_iters", "converged", "length_l",
]
CURVE_COLUMNS = ["format_version", "unit_index", "arc_length_s", "x", "y", "theta"]
TRACE_COLUMNS = ["format_version", "iteration", "gbest_fitness"]
COMPARE_COLUMNS = ["format_version", "case_id", "Qx", "Qy", "Qxm", "Qym", "e_norm"]

EXIT_OK, EXIT_ERROR, EXIT_UNCONVERGED = 0, 1, 2


def fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value is None:
        return ""
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return [row for row in csv.DictReader(line for line in fh if not line.startswith("#"))]


def _check_writable(out_dir):
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        log.error("output directory %s is not writable: %s", out_dir, exc)
        return False
    return True


def write_curve(path, geometry, curve):
    dl = geometry.unit_length
    rows = (
        [FORMAT_VERSION, i, i * dl, p[0], p[1], p[2]]
        for i, p in enumerate(curve.points)
    )
    _write_csv(path, CURVE_COLUMNS, rows)


@dataclass
class CaseOutcome:
    case_id: str
    load: object
    result: object = None
    oracle: object = None
    oracle_error: str | None = None


def _solve_case(cfg: RunConfig, index, case, with_pso, with_oracle):
    out = CaseOutcome(case.case_id, case.load)
    if with_pso:
        for attempt in range(cfg.retries + 1):
            keys = (index,) if attempt == 0 else (index, attempt)
            params = replace(cfg.pso, seed=derive_seed(cfg.seed, *keys))
            out.result = solve_tip_locus(cfg.geometry, case.load, params)
            if out.result.converged:
                break
            log.warning("case %s: no convergence with seed %d (fitness %.4g)", case.case_id, params.seed, out.result.fitness)
    if with_oracle:
        try:
            out.oracle = reference_solve(cfg.geometry, case.load, cfg.oracle, cfg.continuation_steps)
        except OracleError as exc:
            out.oracle_error = str(exc)
            log.warning("case %s: oracle failed: %s", case.case_id, exc)
    return out


def _solve_all(cfg, with_pso, with_oracle, jobs):
    tasks = list(enumerate(cfg.loads))
    if jobs > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(lambda t: _solve_case(cfg, t[0], t[1], with_pso, with_oracle), tasks))
    return [_solve_case(cfg, i, c, with_pso, with_oracle) for i, c in tasks]


def run_cases(cfg: RunConfig, out_dir=None, jobs=None, oracle_only=False) -> int:
    """Solve every case in ``cfg`` and write summary, curve and trace files."""
    out_dir = out_dir or cfg.out_dir
    jobs = jobs or cfg.jobs
    if not _check_writable(out_dir):
        return EXIT_ERROR
    curves_dir = os.path.join(out_dir, "curves")
    os.makedirs(curves_dir, exist_ok=True)
    ell = cfg.geometry.length

    if oracle_only:
        outcomes = _solve_all(cfg, False, True, jobs)
        rows = []
        for o in outcomes:
            ld = o.load
            if o.oracle is None:
                rows.append([FORMAT_VERSION, o.case_id, ld.force, ld.phi, ld.moment, None, None, None, None, None, False, ell])
                continue
            t = o.oracle.tip
            rows.append([FORMAT_VERSION, o.case_id, ld.force, ld.phi, ld.moment, t.qx, t.qy, t.theta0,
                         o.oracle.residual_norm, o.oracle.newton_iters, True, ell])
            curve, _ = integrate_deflection(cfg.geometry, ld, t)
            write_curve(os.path.join(curves_dir, f"oracle_curve_{o.case_id}.csv"), cfg.geometry, curve)
        _write_csv(os.path.join(out_dir, "oracle_summary.csv"), ORACLE_COLUMNS, rows)
        ok = all(o.oracle is not None for o in outcomes)
        return EXIT_OK if ok else EXIT_UNCONVERGED

    outcomes = _solve_all(cfg, True, cfg.oracle_enabled, jobs)
    traces_dir = os.path.join(out_dir, "traces")
    os.makedirs(traces_dir, exist_ok=True)
    rows = []
    ok = True
    for o in outcomes:
        r, ld = o.result, o.load
        ok &= r.converged
        row = [FORMAT_VERSION, o.case_id, ld.force, ld.phi, ld.moment, r.tip.qx, r.tip.qy, r.tip.theta0,
               r.fitness, r.iterations, r.converged]
        if o.oracle is not None:
            t = o.oracle.tip
            row += [t.qx, t.qy, t.theta0, normalized_tip_error(r.tip, (t.qx, t.qy), ell)]
        else:
            ok &= not cfg.oracle_enabled
            row += [None, None, None, None]
        row.append(ell)
        rows.append(row)
        write_curve(os.path.join(curves_dir, f"curve_{o.case_id}.csv"), cfg.geometry, r.curve)
        _write_csv(
            os.path.join(traces_dir, f"trace_{o.case_id}.csv"),
            TRACE_COLUMNS,
            ([FORMAT_VERSION, k + 1, f] for k, f in enumerate(r.trace)),
        )
    _write_csv(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS, rows)
    n_bad = sum(not o.result.converged for o in outcomes)
    log.info("%d cases solved, %d without convergence", len(outcomes), n_bad)
    return EXIT_OK if ok else EXIT_UNCONVERGED


def compare_experiment(summary_path, measured_path, out_path=None, measured_scale=1.0) -> int:
    """Normalized tip error per case between a summary and measured tips.

    ``measured_path`` holds ``case_id, Qxm, Qym`` columns; ``measured_scale``
    converts its coordinates to metres.
    """
    summary = read_csv(summary_path)
    measured = read_csv(measured_path)
    if not measured:
        log.error("measured file %s has no rows", measured_path)
        return EXIT_ERROR
    missing = {"case_id", "Qxm", "Qym"} - set(measured[0])
    if missing:
        log.error("measured file %s lacks column(s) %s", measured_path, ", ".join(sorted(missing)))
        return EXIT_ERROR
    by_id = {row["case_id"]: row for row in summary}
    rows, skipped, errors = [], [], []
    for m in measured:
        s = by_id.get(m["case_id"])
        if s is None or not s.get("Qx"):
            skipped.append(m["case_id"])
            continue
        qxm, qym = float(m["Qxm"]) * measured_scale, float(m["Qym"]) * measured_scale
        qx, qy, ell = float(s["Qx"]), float(s["Qy"]), float(s["length_l"])
        e = math.hypot(qx - qxm, qy - qym) / ell
        errors.append(e)
        rows.append([FORMAT_VERSION, m["case_id"], qx, qy, qxm, qym, e])
    if out_path is None:
        out_path = os.path.join(os.path.dirname(os.path.abspath(summary_path)), "comparison.csv")
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARE_COLUMNS)
        for row in rows:
            w.writerow([fmt(v) if not isinstance(v, str) else v for v in row])
        w.writerow([fmt(FORMAT_VERSION), "MAX", "", "", "", "", fmt(max(errors)) if errors else ""])
        if skipped:
            fh.write("# skipped rows (case_id not in summary)\n")
            for cid in skipped:
                fh.write(f"# skipped,{cid}\n")
    return EXIT_UNCONVERGED if skipped else EXIT_OK


SWEEP_CONFIGS = ("sweeps_uniform.toml", "sweeps_tapered.toml")


def sweep_config_text(name):
    return resources.files("beamswarm").joinpath("configs", name).read_text(encoding="utf-8")


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed, pso=replace(cfg.pso, seed=args.seed))
    if args.no_oracle:
        cfg = replace(cfg, oracle_enabled=False)
    return cfg


def _cmd_solve(args, oracle_only=False):
    try:
        cfg = _apply_overrides(load_config(args.config), args)
    except (OSError, ConfigError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    return run_cases(cfg, args.out_dir, args.jobs, oracle_only=oracle_only)


def _cmd_sweeps(args):
    out_root = args.out_dir or "sweeps_out"
    if not _check_writable(out_root):
        return EXIT_ERROR
    status = EXIT_OK
    for name in SWEEP_CONFIGS:
        cfg = _apply_overrides(parse_config(sweep_config_text(name)), args)
        sub = os.path.join(out_root, name.removesuffix(".toml"))
        status = max(status, run_cases(cfg, sub, args.jobs))
    return status


def _cmd_compare(args):
    scale = 1e-3 if args.measured_units == "mm" else 1.0
    try:
        return compare_experiment(args.summary, args.measured, args.out, scale)
    except (OSError, KeyError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


def _cmd_gen_widths(args):
    scale = 1e-3 if args.units == "mm" else 1.0
    try:
        knots = generate_random_widths(args.lower * scale, args.upper * scale, args.knots, args.seed)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    header = ["format_version", "knot_index", "width_mm" if args.units == "mm" else "width_m"]
    rows = [[FORMAT_VERSION, i, w / scale] for i, w in enumerate(knots.knot_widths)]
    if args.out:
        _write_csv(args.out, header, rows)
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="beamswarm", description="Large-deflection cantilever solver (swarm + Newton oracle).")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def run_flags(sp):
        sp.add_argument("--seed", type=int, help="override the master seed")
        sp.add_argument("--out-dir", help="override the output directory")
        sp.add_argument("--jobs", type=int, help="cases solved concurrently")
        sp.add_argument("--no-oracle", action="store_true", help="skip the Newton cross-check")

    sp = sub.add_parser("solve", help="swarm solve of every case in a config")
    sp.add_argument("config")
    run_flags(sp)
    sp.set_defaults(func=_cmd_solve)

    sp = sub.add_parser("oracle", help="Newton oracle only")
    sp.add_argument("config")
    run_flags(sp)
    sp.set_defaults(func=lambda a: _cmd_solve(a, oracle_only=True))

    sp = sub.add_parser("sweeps", help="built-in uniform and non-uniform sweeps")
    run_flags(sp)
    sp.set_defaults(func=_cmd_sweeps)

    sp = sub.add_parser("compare", help="normalized tip error against measured tips")
    sp.add_argument("summary")
    sp.add_argument("measured")
    sp.add_argument("--out", help="comparison file (default: comparison.csv next to the summary)")
    sp.add_argument("--measured-units", choices=("m", "mm"), default="m")
    sp.set_defaults(func=_cmd_compare)

    sp = sub.add_parser("gen-widths", help="random knot widths, uniform on [lower, upper]")
    sp.add_argument("--lower", type=float, required=True)
    sp.add_argument("--upper", type=float, required=True)
    sp.add_argument("--knots", type=int, default=11)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--units", choices=("mm", "m"), default="mm")
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_gen_widths)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        log.error("--jobs must be >= 1")
        return EXIT_ERROR
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
