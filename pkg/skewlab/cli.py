"""
Command line entry point.

Exit codes: 0 for a positive result (coboundary, admitted expansion, contraction), 1 for a negative one
(obstruction, failed expansion, violated hypothesis) and 2 for invalid input or a computation that could not be
completed.
"""
import argparse
import logging
import sys
from typing import List, Optional

from returns import pipeline as returns_pipeline

from skewlab import config
from skewlab.exceptions import LabError
from skewlab.pipeline import run_pipeline
from skewlab.steps import Outcome, command_pipeline

logger = logging.getLogger("skewlab")

COMMANDS = {
    "pcf": "PCF of a path or quad cycle",
    "solve": "classify the cocycle and reconstruct the transfer function",
    "bunching": "partial hyperbolicity and bunching inequalities",
    "regularity": "limit polynomials, expansion fits and Hölder exponents",
    "jets": "fiber contraction of the jet graph transform",
    "periodic": "periodic orbits and their Birkhoff sums",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skewlab", description="Cohomological equations over skew products")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--scenario", help="scenario file; defaults apply to missing sections")
        sub.add_argument("--out", help="output directory (overrides [run] out)")
        sub.add_argument("--seed", type=int, help="64-bit seed (overrides [run] seed)")
        sub.add_argument("--grid", type=int, help="grid size (overrides [solver] grid_n)")
        sub.add_argument("--tol", type=float, help="tolerance (overrides [solver] tol and [pcf] tol)")
    parser.add_argument("--log-level", default=None, help="level of the skewlab logger, default from config")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    logger.setLevel((args.log_level or config.LOG_LEVEL).upper())

    result = run_pipeline(
        command_pipeline(args.command),
        scenario_path=args.scenario,
        seed=args.seed,
        grid=args.grid,
        tol=args.tol,
        out=args.out,
    )
    if not returns_pipeline.is_successful(result):
        error = result.failure()
        if not isinstance(error, LabError):
            raise error
        print("error: {}".format(error), file=sys.stderr)
        return 2

    outcome: Outcome = result.unwrap()["outcome"]
    for line in outcome.summary:
        print(line)
    for path in outcome.written:
        logger.info("wrote %s", path)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
