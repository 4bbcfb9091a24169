"""Command line interface.

Subcommands:
  run          execute a scenario or preset and write snapshots + run log
  stability    evaluate the per-star step bound on the initial state
  verify       stencil sanity checks against polynomial and classical oracles
  convergence  manufactured-solution refinement studies

Exit codes: 0 success, 1 configuration or verification failure, 2 divergence.
"""

from __future__ import annotations

import argparse
import os
import sys

from .cloud import generate_jittered, generate_regular
from .errors import (
    CloudError,
    DegenerateStarError,
    InsufficientNodesError,
    NoAdmissibleTimeStepError,
    ScenarioError,
)
from .harness import (
    convergence_study,
    fd_equivalence,
    polynomial_exactness,
    regular_refinement,
    temporal_convergence_study,
)
from .output import (
    write_plot_script,
    write_run_log,
    write_snapshots,
    write_stability_report,
    write_stencil_dump,
)
from .scenario import PRESET_NAMES, Scenario, get_preset, parse_scenario
from .scheme import enforce_neumann, run as run_scheme
from .stability import dt_bound

CONFIG_ERRORS = (ScenarioError, CloudError, InsufficientNodesError,
                 DegenerateStarError, NoAdmissibleTimeStepError, ValueError, OSError)


def _add_scenario_args(p: argparse.ArgumentParser, with_run_flags: bool = True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="path to a scenario file")
    src.add_argument("--preset", choices=PRESET_NAMES, help="built-in scenario")
    p.add_argument("--out", help="output directory (overrides the scenario)")
    p.add_argument("--seed", type=int, help="cloud seed override")
    if with_run_flags:
        p.add_argument("--dt-override", type=float, dest="dt_override",
                       help="time step override")


def _load_scenario(args) -> Scenario:
    scenario = parse_scenario(args.scenario) if args.scenario else get_preset(args.preset)
    return scenario.with_overrides(seed=args.seed, out=args.out,
                                   dt=getattr(args, "dt_override", None))


def _assemble(scenario: Scenario):
    cloud = scenario.cloud.build()
    table = scenario.star.build_table(cloud)
    initial = scenario.initial_state(cloud)
    return cloud, table, initial


def _cmd_run(args) -> int:
    scenario = _load_scenario(args)
    cloud, table, initial = _assemble(scenario)
    traj = run_scheme(cloud, table, scenario.model, initial, scenario.scheme)
    out = scenario.output_dir
    write_snapshots(traj, out)
    write_run_log(traj, out)
    write_plot_script(traj, out)
    for ev in traj.stability_events:
        print(f"step {ev.step} t={ev.time:.6f}: dt={ev.dt:.3e} exceeds bound "
              f"{ev.global_dt:.3e} ({ev.action})")
    if traj.diverged is not None:
        print(f"error: {traj.diverged}", file=sys.stderr)
        print(f"partial results in {out}", file=sys.stderr)
        return 2
    print(f"{scenario.name}: {traj.log[-1].step} steps to t={traj.final.time:g}, "
          f"max k={traj.log[-1].max_k:.6g}; results in {out}")
    return 0


def _cmd_stability(args) -> int:
    scenario = _load_scenario(args)
    cloud, table, initial = _assemble(scenario)
    state = enforce_neumann(initial, table, cloud)
    report = dt_bound(table, state, scenario.model)
    out = args.out or scenario.output_dir
    os.makedirs(out, exist_ok=True)
    path = write_stability_report(report, os.path.join(out, "stability.csv"))
    if args.dump_stencils:
        write_stencil_dump(table, os.path.join(out, "stencil_dump.csv"))
    print(f"{scenario.name}: global dt bound {report.global_dt:.6e} over "
          f"{len(report.per_star)} interior stars; "
          f"{len(report.violations)} sign-condition failures; report in {path}")
    if scenario.scheme.dt is not None and scenario.scheme.dt > report.global_dt:
        print(f"warning: scenario dt={scenario.scheme.dt:g} exceeds the bound")
    return 0


def _cmd_verify(args) -> int:
    out = args.out
    checks: list[tuple[str, float, float]] = []

    cloud1 = generate_jittered(100, 1.0, dim=1, jitter=0.3, seed=1)
    checks.append(("polynomial exactness 1D jittered N=100 s=2",
                   polynomial_exactness(cloud1, 2, "distance").max_error, 1e-9))
    cloud2 = generate_jittered(20, 1.0, dim=2, jitter=0.25, seed=2)
    checks.append(("polynomial exactness 2D jittered N=400 s=8 quadrant",
                   polynomial_exactness(cloud2, 8, "quadrant").max_error, 1e-9))
    checks.append(("classical difference recovery 1D",
                   fd_equivalence(generate_regular(11, 1.0, dim=1)), 1e-12))
    checks.append(("classical difference recovery 2D",
                   fd_equivalence(generate_regular(11, 1.0, dim=2)), 1e-12))

    ok = True
    lines = []
    for name, value, tol in checks:
        status = "pass" if value <= tol else "FAIL"
        ok = ok and value <= tol
        lines.append((name, value, tol, status))
        print(f"{status}: {name}: {value:.3e} (tolerance {tol:.0e})")
    if out:
        os.makedirs(out, exist_ok=True)
        import csv as _csv
        with open(os.path.join(out, "verify_report.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["check", "value", "tolerance", "status"])
            w.writerows(lines)
    return 0 if ok else 1


def _cmd_convergence(args) -> int:
    dim = args.dim
    s = 2 if dim == 1 else 8
    criterion = "distance" if dim == 1 else "quadrant"
    clouds = regular_refinement(9, 3, dim=dim)
    spatial = convergence_study(clouds, s, criterion)
    temporal = temporal_convergence_study(clouds[1], s, criterion)

    print(f"spatial refinement ({dim}D):")
    for h, err in spatial.levels:
        print(f"  h={h:.5f}  max error={err:.6e}")
    for h in spatial.excluded:
        print(f"  h={h:.5f}  diverged (excluded)")
    print(f"  observed order: {spatial.observed_order:.3f}")
    print("time refinement:")
    for dt, err in temporal.levels:
        print(f"  dt={dt:.2e}  max error={err:.6e}")
    print(f"  observed order: {temporal.observed_order:.3f}")

    if args.out:
        os.makedirs(args.out, exist_ok=True)
        import csv as _csv
        for fname, result, label in [("convergence_spatial.csv", spatial, "h"),
                                     ("convergence_temporal.csv", temporal, "dt")]:
            with open(os.path.join(args.out, fname), "w", newline="") as fh:
                w = _csv.writer(fh)
                w.writerow([label, "max_error"])
                for x, err in result.levels:
                    w.writerow([repr(x), repr(err)])
                w.writerow(["observed_order", repr(result.observed_order)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="meshless-growth",
        description="Meshless solver for a capital-technology growth system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario")
    _add_scenario_args(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("stability", help="per-star step bound of the initial state")
    _add_scenario_args(p, with_run_flags=False)
    p.add_argument("--dump-stencils", action="store_true",
                   help="also write every stencil row")
    p.set_defaults(func=_cmd_stability)

    p = sub.add_parser("verify", help="stencil checks against analytic oracles")
    p.add_argument("--out", help="directory for the CSV report")
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("convergence", help="manufactured-solution studies")
    p.add_argument("--dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", help="directory for the CSV reports")
    p.set_defaults(func=_cmd_convergence)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
