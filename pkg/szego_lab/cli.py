"""
``szego-lab`` command line: ``run`` a scenario, ``check`` a finished run directory, ``list`` the
scenarios. The exit code is the number of failed checks, capped at 100.
"""

__all__ = [
    "build_parser",
    "main",
]

import argparse
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

from pydantic import ValidationError

from szego_lab.config import configure_logging, get_settings
from szego_lab.experiments import SCENARIOS, check_run, get_scenario, run_scenario
from szego_lab.reports import RunSummary, read_initial_data

logger = logging.getLogger(__name__)

EXIT_CAP = 100
USAGE_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="szego-lab", description=__doc__)
    parser.add_argument("--config", type=Path, default=None, help="JSON settings file")
    parser.add_argument("--log-level", default=None, help="level of the szego_lab loggers")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario")
    run.add_argument("scenario", help="scenario name, see 'szego-lab list'")
    run.add_argument("--alpha", type=float, default=None)
    run.add_argument("--N", dest="N", type=int, default=None, help="kept Fourier modes")
    run.add_argument("--grid", dest="M", type=int, default=None, help="product grid size M")
    run.add_argument("--tmax", dest="t_max", type=float, default=None)
    run.add_argument("--rel-tol", dest="rel_tol", type=float, default=None)
    run.add_argument("--data", type=Path, default=None, help="rational data or coefficient JSON file")
    run.add_argument("--out", type=Path, default=None, help="run directory")
    run.add_argument("--seed", type=int, default=0)

    check = commands.add_parser("check", help="re-evaluate a finished run")
    check.add_argument("run_dir", type=Path)
    check.add_argument("--ignore", nargs="*", default=[], metavar="PREFIX", help="event code prefixes to ignore")

    commands.add_parser("list", help="list the scenarios")
    return parser


def _report(summary: RunSummary) -> int:
    for result in summary.checks:
        status = "PASS" if result.passed else "FAIL"
        value = ""
        if result.value is not None and result.threshold is not None:
            value = f" {result.value:.6g} {result.comparison} {result.threshold:.6g}"
        print(f"{status} {result.name}{value} {result.details}".rstrip())
    failed = len(summary.failed)
    print(f"{summary.scenario}: {len(summary.checks) - failed} passed, {failed} failed")
    return min(failed, EXIT_CAP)


def _run(args: argparse.Namespace) -> int:
    settings = get_settings(args.config)
    try:
        scenario = get_scenario(args.scenario)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return USAGE_ERROR
    base, configured = settings.regime(scenario.regime)
    try:
        config = scenario.resolve_config(
            base, configured, alpha=args.alpha, N=args.N, M=args.M, t_max=args.t_max, rel_tol=args.rel_tol
        )
    except ValidationError as exc:
        print(f"Invalid configuration: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if args.data is not None:
        try:
            read_initial_data(args.data)
        except (OSError, ValueError) as exc:
            print(f"Invalid data file: {exc}", file=sys.stderr)
            return USAGE_ERROR
    out_dir = args.out if args.out is not None else settings.OUTPUT_ROOT / scenario.name
    summary = run_scenario(scenario, config, out_dir, seed=args.seed, data_path=args.data)
    return _report(summary)


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings(args.config)
    configure_logging(args.log_level or settings.LOG_LEVEL)

    match args.command:
        case "list":
            for scenario in SCENARIOS.values():
                print(f"{scenario.name:<22} {scenario.description}")
            return 0
        case "check":
            try:
                summary = check_run(args.run_dir, args.ignore)
            except FileNotFoundError as exc:
                print(f"No run found: {exc}", file=sys.stderr)
                return USAGE_ERROR
            return _report(summary)
        case _:
            return _run(args)


if __name__ == "__main__":
    sys.exit(main())
