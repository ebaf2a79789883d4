"""Command line entry point for heisenflow."""

import argparse
import sys
from typing import List, Optional

from heisenflow import __version__
from heisenflow.cli.commands import (
    EXIT_INPUT,
    EXIT_WRONG_PIPELINE,
    cmd_decompose,
    cmd_flow,
    cmd_verify,
)
from heisenflow.utils.exceptions import HeisenflowError, NotSolenoidalError
from heisenflow.utils.logger import configure_logging, get_logger

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heisenflow",
        description="Decompose horizontal vector charges on the Heisenberg group into curves.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log errors only")
    commands = parser.add_subparsers(dest="command", required=True)

    decompose = commands.add_parser("decompose", help="decompose a charge into weighted curves")
    decompose.add_argument("--config", required=True, help="run configuration JSON")
    decompose.add_argument("--charge", required=True, help="charge JSON (atoms or preset)")
    decompose.add_argument(
        "--general", action="store_true", help="use the lifting pipeline for non-solenoidal charges"
    )
    decompose.add_argument("--out", help="output directory (default: output_dir of the config)")
    decompose.add_argument("--epsilon-schedule", help="decreasing epsilons, e.g. 0.2,0.1,0.05")
    decompose.add_argument("--threads", type=int, help="worker threads for seed integration")
    decompose.set_defaults(handler=cmd_decompose)

    verify = commands.add_parser("verify", help="verify stored curves against a charge")
    verify.add_argument("--curves", required=True, help="curves.json from a decompose run")
    verify.add_argument("--charge", required=True, help="charge JSON")
    verify.add_argument("--config", required=True, help="run configuration JSON")
    verify.add_argument("--general", action="store_true", help="check against the raw charge")
    verify.add_argument("--out", help="write report.json into this directory")
    verify.set_defaults(handler=cmd_verify)

    flow = commands.add_parser("flow", help="integrate a horizontal field from seeds")
    flow.add_argument("--config", required=True, help="run configuration JSON (l is t_max)")
    flow.add_argument(
        "--field", required=True, help="preset (rotational, constant, dipole) or table JSON"
    )
    flow.add_argument(
        "--seed", action="append", required=True, help="comma separated seed coordinates"
    )
    flow.add_argument("--out", help="output directory (default: output_dir of the config)")
    flow.set_defaults(handler=cmd_flow)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return its exit code.

    Exit codes: 0 success, 1 input or numerical error, 2 wrong pipeline,
    3 verification failure.
    """
    args = build_parser().parse_args(argv)
    if args.verbose:
        configure_logging("DEBUG")
    elif args.quiet:
        configure_logging("ERROR")

    try:
        return args.handler(args)
    except NotSolenoidalError as exc:
        logger.error(f"{exc}; rerun with --general to use the lifting pipeline")
        return EXIT_WRONG_PIPELINE
    except HeisenflowError as exc:
        logger.error(f"{type(exc).__name__}: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
