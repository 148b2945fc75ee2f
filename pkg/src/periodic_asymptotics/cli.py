"""
Command line front-end.

Usage:
    periodic-asymptotics run runs/switched.cfg --n 128 --horizon 500 --set spectrum.n_max=1024
    periodic-asymptotics reproduce-example 5.2 --delta 0.4 --out output/example-5.2

Exit status is 0 on success, 2 for invalid configuration or arguments and 3
for numerical failures or reproduced claims with status FAIL.
"""

import argparse
import sys
from pathlib import Path

from periodic_asymptotics.config import ConfigError, load_env_config, load_run_config
from periodic_asymptotics.errors import DomainError, NumericalError
from periodic_asymptotics.logging_config import get_logger, setup_logging
from periodic_asymptotics.pipeline import EXAMPLES, reproduce_example, run

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

FLAG_KEYS = ("n", "n_t", "horizon", "stride", "tasks", "seed", "output")


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with both subcommands.

    :return: Configured parser
    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(
        prog="periodic-asymptotics",
        description="Asymptotics of periodically damped transport and wave equations",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR or CRITICAL")
    parser.add_argument("--env-file", default=None, help="Explicit .env file with PERIODICASYM_ settings")
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Execute the tasks of a run file")
    run_parser.add_argument("config", type=Path, help="Flat key=value run file")
    run_parser.add_argument("--n", dest="n", help="Number of cells (power of two)")
    run_parser.add_argument("--n-t", dest="n_t", help="Time samples per period")
    run_parser.add_argument("--horizon", help="Number of periods")
    run_parser.add_argument("--stride", help="Periods between samples")
    run_parser.add_argument("--tasks", help="Comma separated task list")
    run_parser.add_argument("--seed", help="Seed of random data")
    run_parser.add_argument("--out", dest="output", help="Output directory")
    run_parser.add_argument(
        "--set",
        dest="assignments",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override any run-file key, e.g. region.delta=0.4 (repeatable)",
    )

    example_parser = commands.add_parser("reproduce-example", help="Reproduce one canonical example")
    example_parser.add_argument("example", choices=sorted(EXAMPLES), help="Example id")
    example_parser.add_argument("--delta", type=float, default=None, help="Shape parameter")
    example_parser.add_argument("--n", type=int, default=None, help="Number of cells")
    example_parser.add_argument("--out", type=Path, default=None, help="Output directory")
    example_parser.add_argument("--seed", type=int, default=None, help="Seed of random states, default PERIODICASYM_SEED")
    return parser


def collect_overrides(args: argparse.Namespace) -> dict[str, str]:
    """
    Turn command line flags into run-file key overrides.

    :param args: Parsed arguments of the run subcommand
    :ptype args: argparse.Namespace
    :return: Key to value mapping
    :rtype: dict[str, str]
    :raises ConfigError: If a --set assignment has no '='
    """
    overrides = {key: str(getattr(args, key)) for key in FLAG_KEYS if getattr(args, key, None) is not None}
    for assignment in args.assignments:
        key, sep, value = assignment.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects KEY=VALUE, got {assignment!r}")
        overrides[key.strip()] = value.strip()
    return overrides


def _run(args: argparse.Namespace) -> int:
    """Run subcommand."""
    config = load_run_config(args.config, collect_overrides(args))
    setup_logging(level=args.log_level, run_dir=config.output_dir)
    result = run(config)
    print(result.report.render())
    print(f"Artifacts written to {result.output_dir}")
    return EXIT_OK


def _reproduce(args: argparse.Namespace) -> int:
    """Reproduce-example subcommand."""
    setup_logging(level=args.log_level, run_dir=args.out)
    report = reproduce_example(args.example, args.delta, args.n, args.out, args.seed)
    print(report.render())
    return EXIT_NUMERICAL if report.failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    """
    Entry point of the ``periodic-asymptotics`` command.

    :param argv: Arguments without program name, sys.argv[1:] when None
    :ptype argv: list[str] | None
    :return: Exit status
    :rtype: int

    Example::

        >>> main(["reproduce-example", "4.2", "--delta", "0.75"])
        0
    """
    args = build_parser().parse_args(argv)
    try:
        load_env_config(args.env_file)
        if args.command == "run":
            return _run(args)
        return _reproduce(args)
    except (ConfigError, DomainError) as exc:
        print(f"ERROR: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        logger.error("Invariant '%s' failed: %s", exc.invariant, exc)
        print(f"ERROR: invariant '{exc.invariant}' failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
