import argparse
import asyncio
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from fairclust.commands import HANDLERS, RunConfig, UsageError
from fairclust.commands.common import build_shared_parser
from fairclust.commands.gen import GEN_KINDS
from fairclust.core.instance import InstanceError
from fairclust.services.enumeration import EnumerationCapError
from fairclust.services.fpt import FPTError
from fairclust.services.generators import GeneratorError
from fairclust.services.simplex import IterationLimitError
from fairclust.storage.documents import DocumentError, document_store, render
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAP = 2

INPUT_ERRORS = (UsageError, DocumentError, InstanceError, ValidationError, FPTError, GeneratorError)
CAP_ERRORS = (EnumerationCapError, IterationLimitError)


class CommandParser(argparse.ArgumentParser):
    """Argument parser that reports bad flags as input errors instead of exiting."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> CommandParser:
    shared = build_shared_parser()
    parser = CommandParser(
        prog="fairclust",
        description="Socially fair clustering: LP rounding, FPT subset search, oracle and generators",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("solve", parents=[shared], help="End-to-end (3^z + eps)-approximation")
    sub.add_parser("bicriteria", parents=[shared], help="LP relaxation plus amplified rounding")
    sub.add_parser("baseline", parents=[shared], help="O(l)-approximation via local search")
    oracle = sub.add_parser("oracle", parents=[shared], help="Exact optimum by exhaustion")
    oracle.add_argument("--objective", choices=("fair", "unconstrained"), default="fair")
    sub.add_parser("validate", parents=[shared], help="Check the metric axioms")
    stats = sub.add_parser("stats", parents=[shared], help="Monte-Carlo checks of the rounding")
    stats.add_argument(
        "--iterations",
        type=lambda s: tuple(int(v) for v in s.split(",")),
        help="Comma-separated iteration counts for the survival law (default 1,2,5)",
    )

    gen = sub.add_parser("gen", help="Generate instances")
    kinds = gen.add_subparsers(dest="kind", required=True, metavar="{" + ",".join(GEN_KINDS) + "}")
    euclid = kinds.add_parser("euclidean", parents=[shared], help="Uniform points in the unit cube")
    euclid.add_argument("--n-points", dest="n_points", type=int, default=10)
    euclid.add_argument("--n-facilities", dest="n_facilities", type=int, default=6)
    euclid.add_argument("--dim", type=int, default=2)
    euclid.add_argument("--groups", type=int, default=2)
    euclid.add_argument("--k", type=int, default=2)
    euclid.add_argument("--weight-min", dest="weight_min", type=float, default=1.0)
    euclid.add_argument("--weight-max", dest="weight_max", type=float, default=1.0)
    kinds.add_parser("setcover-reduce", parents=[shared], help="k-supplier instance of a set-coverage file")
    kinds.add_parser("singleton", parents=[shared], help="Replace groups by singleton unit-weight groups")
    planted = kinds.add_parser("setcover-planted", parents=[shared], help="Set coverage with a planted cover")
    planted.add_argument("--universe", type=int, default=6)
    planted.add_argument("--sets", type=int, default=6)
    planted.add_argument("--k", type=int, default=2)
    planted.add_argument("--no", action="store_true", help="Destroy every cover (NO instance)")
    return parser


def configure_logging(level: Optional[str] = None) -> None:
    # stdout carries the JSON report
    logging.basicConfig(
        level=(level or settings.log_level).upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
        force=True,
    )


async def run(cfg: RunConfig) -> int:
    """
    Execute one command and emit its report.

    Returns:
        int: 0 on success, 1 on input errors, 2 when a resource cap was exceeded
    """
    try:
        output = await HANDLERS[cfg.command](cfg)
        files = list(output.files)
        if cfg.output_path:
            files.append((cfg.output_path, render(output.document)))
        await document_store.write_all(files)
        if not cfg.output_path:
            sys.stdout.write(render(output.document))
            sys.stdout.flush()
        return EXIT_OK
    except CAP_ERRORS as e:
        logger.error(f"{cfg.command}: {e}")
        return EXIT_CAP
    except INPUT_ERRORS as e:
        logger.error(f"{cfg.command}: {e}")
        return EXIT_INPUT
    except Exception as e:
        logger.error(f"{cfg.command} failed: {e}", exc_info=True)
        return EXIT_INPUT


def main(argv: Optional[List[str]] = None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        configure_logging(ns.log_level)
        cfg = RunConfig.from_namespace(ns)
    except UsageError as e:
        configure_logging()
        logger.error(f"{e}")
        return EXIT_INPUT
    return asyncio.run(run(cfg))


if __name__ == "__main__":
    sys.exit(main())
