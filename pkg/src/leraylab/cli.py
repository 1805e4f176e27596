"""Command-line entry points.

Four subcommands: ``run`` (one lambda through the radius schedule),
``sweep`` (several lambdas), ``blowdown`` (rescale a saved state and
print the unit-disc measures), and ``check`` (re-validate a report file,
exit status 0 only if every gate passes).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

from .blowdown import blow_down
from .driver import ExperimentConfig, check_report, emit_reports, run_lambda_sweep
from .solver import load_state, recover_pressure


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad float list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leray", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one lambda over an expanding radius schedule")
    run.add_argument("--lambda", dest="lam", type=float, required=True, help="far-field speed")
    run.add_argument("--radii", type=_parse_floats, default=(10.0, 20.0, 40.0, 80.0))
    run.add_argument("--ntheta", type=int, default=128)
    run.add_argument("--tol", type=float, default=1e-10)
    run.add_argument("--out", required=True, help="output directory")

    sweep = sub.add_parser("sweep", help="run several lambdas and write one report")
    sweep.add_argument("--lambdas", type=_parse_floats, required=True)
    sweep.add_argument("--radii", type=_parse_floats, default=(10.0, 20.0, 40.0, 80.0))
    sweep.add_argument("--ntheta", type=int, default=128)
    sweep.add_argument("--tol", type=float, default=1e-10)
    sweep.add_argument("--out", required=True, help="output directory")

    blowd = sub.add_parser("blowdown", help="rescale a saved state to the unit disc")
    blowd.add_argument("--state", required=True, help="state file prefix (no extension)")
    blowd.add_argument("--delta0", type=float, default=0.05)

    check = sub.add_parser("check", help="re-validate a report.json")
    check.add_argument("--report", required=True)

    return parser


def _cmd_solve(lambdas, args) -> int:
    cfg = ExperimentConfig(
        lambdas=lambdas,
        radii=tuple(args.radii),
        n_theta=args.ntheta,
        newton_tol=args.tol,
    )
    states: dict = {}
    report = run_lambda_sweep(cfg, states_out=states)
    written = emit_reports(report, args.out, states=states)
    for path in written:
        print(path)
    failed = [row for row in report.rows if row.get("failed")]
    if failed:
        for row in failed:
            print(f"solver failed at lambda={row['lambda']} r={row['r']}: {row['error']}", file=sys.stderr)
        return 1
    return 0


def _cmd_blowdown(args) -> int:
    state = load_state(args.state)
    pressure = recover_pressure(state)
    report = blow_down(state, pressure, args.delta0)
    print(json.dumps(asdict(report), sort_keys=True, indent=2))
    return 0


def _cmd_check(args) -> int:
    with open(args.report) as fh:
        report = json.load(fh)
    failures = check_report(report)
    if failures:
        for line in failures:
            print(f"FAIL {line}")
        print(f"{len(failures)} check(s) failed")
        return 1
    print(f"ok: {len(report.get('rows', []))} row(s), all checks passed")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_solve((args.lam,), args)
    if args.command == "sweep":
        return _cmd_solve(tuple(args.lambdas), args)
    if args.command == "blowdown":
        return _cmd_blowdown(args)
    if args.command == "check":
        return _cmd_check(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
