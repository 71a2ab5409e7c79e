"""Command-line interface.

Subcommands: simulate | ensemble | converge | uniqueness | check-b2 | validate.
Common flags: --config PATH, --set section.key=value (repeatable), --out DIR,
--seed N (noise seed), --threads N.

Exit codes: 0 success, 1 validation failure, 2 blow-up, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, apply_override, load_config, to_ini
from .diagnostics import write_diagnostics_csv
from .integrator import BLOW_UP, COMPLETED
from .snapshots import write_snapshot

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BLOWUP = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="ksns",
                     description="Stochastic chemotaxis-fluid solver and verification harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("simulate", "run a single trajectory"),
        ("ensemble", "run a Monte Carlo ensemble over noise seeds"),
        ("converge", "run a refinement/convergence study"),
        ("uniqueness", "run same-seed and perturbed-twin experiments"),
        ("check-b2", "evaluate the large-diffusion coefficient condition"),
        ("validate", "audit the structural assumptions on data and coefficients"),
    ]:
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--config", type=str, default=None, help="path to the run configuration")
        sp.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config entry (section.key=value)")
        sp.add_argument("--out", type=str, default=None, help="output directory")
        sp.add_argument("--seed", type=int, default=None, help="override the noise seed")
        sp.add_argument("--threads", type=int, default=1, help="worker processes for ensembles")
    return parser


def _load(args) -> ExperimentConfig:
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise UsageError(f"config file not found: {path}")
        cfg = load_config(path)
    else:
        cfg = ExperimentConfig()
    for assignment in args.overrides:
        cfg = apply_override(cfg, assignment)
    if args.seed is not None:
        cfg = apply_override(cfg, f"noise.seed={args.seed}")
    if args.out is not None:
        cfg = apply_override(cfg, f"out_dir={args.out}")
    return cfg


def _outdir(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "snapshots").mkdir(exist_ok=True)
    with open(out / "config.ini", "w") as fh:
        fh.write(to_ini(cfg))
    return out


def _write_state_snapshots(out: Path, tag: str, state) -> None:
    write_snapshot(out / "snapshots" / f"{tag}_n.ksns", state.n.to_real())
    write_snapshot(out / "snapshots" / f"{tag}_c.ksns", state.c.to_real())
    write_snapshot(out / "snapshots" / f"{tag}_u1.ksns", state.u.u1.to_real())
    write_snapshot(out / "snapshots" / f"{tag}_u2.ksns", state.u.u2.to_real())


def cmd_simulate(cfg: ExperimentConfig) -> int:
    from . import reports
    from .experiments import entropy_series, fit_exponential_envelope, simulate

    out = _outdir(cfg)
    problem, traj = simulate(cfg)
    write_diagnostics_csv(out / "diagnostics.csv", traj.records)
    for step_no, state in zip(traj.checkpoint_steps, traj.states):
        _write_state_snapshots(out, f"step{step_no:06d}", state)
    reports.save_diagnostics_figure(traj.records, out / "diagnostics.png")
    reports.save_fields_figure(traj.final_state, out / "fields.png")

    summary = {
        "status": traj.status,
        "message": traj.message,
        "steps": len(traj.records) - 1,
        "box_length": problem.grid.box_length,
        "n_points": problem.grid.n_points,
        "level": cfg.dynamics.level,
        "mass_initial": traj.records[0].mass_n,
        "mass_final": traj.records[-1].mass_n,
        "linf_c_max": max(r.linf_c for r in traj.records),
        "min_n_min": min(r.min_n for r in traj.records),
        "floored_fraction_max": max(r.floored_fraction for r in traj.records),
        "lambda_gn": problem.params.diagnostics.lambda_gn,
        "c_c0": problem.params.diagnostics.c_c0,
    }
    if cfg.dynamics.level == "mod2":
        summary["entropy_note"] = "mod2 entropy diagnostics are experimental (mean-killing J_k)"
    if traj.status == COMPLETED and len(traj.records) > 2:
        try:
            times, series = entropy_series(traj, "1")
            fit = fit_exponential_envelope(times, series,
                                           baseline=traj.records[0].entropy_F1 + 1.0)
            summary.update({
                "entropy1_envelope_c": fit.envelope_constant,
                "entropy1_fit_c": fit.c_fit,
                "entropy1_fit_residual": fit.residual_max,
            })
        except ValueError:
            summary["entropy1_envelope_c"] = "nan"
    reports.write_summary(out / "summary.ini", {"summary": summary})
    print(f"simulate: {traj.status} after {len(traj.records) - 1} steps -> {out}")
    if traj.status == BLOW_UP:
        return EXIT_BLOWUP
    if traj.status != COMPLETED:
        print(traj.message, file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_ensemble(cfg: ExperimentConfig, threads: int = 1) -> int:
    from . import reports
    from .experiments import run_ensemble

    out = _outdir(cfg)
    summary = run_ensemble(cfg)
    for member, records in enumerate(summary.member_records):
        write_diagnostics_csv(out / f"member{member:03d}.csv", records)
    rows = np.column_stack([
        summary.times, summary.f1_mean, summary.f1_median, summary.f1_q90,
        summary.u2_mean, summary.g1_integral_mean,
    ])
    header = "time,f1_mean,f1_median,f1_q90,u2_mean,g1_integral_mean"
    np.savetxt(out / "ensemble.csv", rows, delimiter=",", header=header, comments="")
    reports.save_ensemble_figure(summary, out / "ensemble.png")
    reports.write_summary(out / "summary.ini", {"ensemble": {
        "n_members": summary.n_members,
        "completed": summary.completed_members,
        "blow_ups": ",".join(str(m) for m in summary.blown_up_members) or "none",
        "sup_f1_p1": summary.sup_f1_moments[1],
        "sup_f1_p2": summary.sup_f1_moments[2],
    }})
    print(f"ensemble: {summary.completed_members}/{summary.n_members} members completed -> {out}")
    return EXIT_BLOWUP if summary.blown_up_members else EXIT_OK


def cmd_converge(cfg: ExperimentConfig) -> int:
    from . import reports
    from .experiments import run_convergence

    out = _outdir(cfg)
    report = run_convergence(cfg)
    (out / "convergence.txt").write_text(report.to_text() + "\n")
    with open(out / "convergence.csv", "w") as fh:
        fh.write("level,dist_n,dist_c,dist_u,dist_total\n")
        for i, lvl in enumerate(report.levels):
            fh.write(",".join(repr(x) for x in (
                lvl, report.distances["n"][i], report.distances["c"][i],
                report.distances["u"][i], report.distances["total"][i])) + "\n")
    reports.save_convergence_figure(report, out / "convergence.png")
    reports.write_summary(out / "summary.ini", {"convergence": {
        "axis": report.axis,
        "fitted_rate": report.fitted_rate,
        "expected_rate": report.expected_rate,
        "monotone": report.monotone,
        "passed": report.passed,
        "note": "k-axis asserts monotone decay and a first-order fit only; "
                "the theoretical constants are too large for a quantitative check",
    }})
    print(report.to_text())
    return EXIT_OK if report.passed else EXIT_VALIDATION


def cmd_uniqueness(cfg: ExperimentConfig) -> int:
    from . import reports
    from .experiments import run_uniqueness

    out = _outdir(cfg)
    report = run_uniqueness(cfg)
    (out / "uniqueness.txt").write_text(report.to_text() + "\n")
    rows = np.column_stack([report.times, report.d_delta, report.d_half,
                            report.gronwall_integral])
    np.savetxt(out / "uniqueness.csv", rows, delimiter=",",
               header="time,d_delta,d_half,gronwall_integral", comments="")
    reports.save_uniqueness_figure(report, out / "uniqueness.png")
    reports.write_summary(out / "summary.ini", {"uniqueness": {
        "bit_identical": report.bit_identical,
        "c_hat": report.c_hat,
        "envelope_holds": report.envelope_holds,
        "ratio_at_end": report.ratio_at_end,
        "ratio_in_window": report.ratio_in_window,
        "max_step_jump": report.max_step_jump,
    }})
    print(report.to_text())
    ok = report.bit_identical and report.envelope_holds and report.ratio_in_window
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_check_b2(cfg: ExperimentConfig) -> int:
    from . import reports
    from .experiments import run_check_b2

    result = run_check_b2(cfg)
    verdict = "PASS" if result["pass"] else "FAIL"
    print(f"check-b2: lhs = {result['lhs']:.6g} -> {verdict} "
          f"(Lambda = {result['lambda_gn']}, ||n0||_L1 = {result['n0_l1']:.6g}, "
          f"||c0||_inf = {result['c0_inf']:.6g})")
    out = Path(cfg.out_dir)
    if out != Path("out") or out.exists():
        out.mkdir(parents=True, exist_ok=True)
        reports.write_summary(out / "summary.ini", {"check_b2": result})
    return EXIT_OK if result["pass"] else EXIT_VALIDATION


def cmd_validate(cfg: ExperimentConfig) -> int:
    from . import reports
    from .experiments import run_validate

    reports_list = run_validate(cfg)
    all_text = "\n\n".join(r.to_text() for r in reports_list)
    print(all_text)
    out = Path(cfg.out_dir)
    if out != Path("out") or out.exists():
        out.mkdir(parents=True, exist_ok=True)
        (out / "validation.txt").write_text(all_text + "\n")
    return EXIT_OK if all(r.passed for r in reports_list) else EXIT_VALIDATION


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "simulate":
            return cmd_simulate(cfg)
        if args.command == "ensemble":
            return cmd_ensemble(cfg, threads=args.threads)
        if args.command == "converge":
            return cmd_converge(cfg)
        if args.command == "uniqueness":
            return cmd_uniqueness(cfg)
        if args.command == "check-b2":
            return cmd_check_b2(cfg)
        if args.command == "validate":
            return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
