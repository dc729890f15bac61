import argparse
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel

from fairclust.core.instance import Instance, InstanceError
from fairclust.core.metric import validate_metric
from fairclust.storage.documents import document_store
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

COMMANDS = ("solve", "bicriteria", "baseline", "oracle", "gen", "validate", "stats")


class UsageError(Exception):
    """Custom exception for invalid command-line input."""
    pass


@dataclass
class RunConfig:
    """One command invocation, flags already parsed."""

    command: str
    instance_path: Optional[str] = None
    epsilon: float = 0.5
    seed: int = 0
    z: Optional[float] = None
    output_path: Optional[str] = None
    workers: Optional[int] = None
    enum_cap: Optional[int] = None
    oracle_cap: Optional[int] = None
    dump_lp: Optional[str] = None
    dump_trace: Optional[str] = None
    skip_metric_check: bool = False
    trials: Optional[int] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"Unknown command {self.command!r}")
        if self.command in ("solve", "bicriteria", "stats") and not 0 < self.epsilon <= 1:
            raise UsageError(f"--epsilon must lie in (0, 1], got {self.epsilon}")
        if self.workers is not None and self.workers < 1:
            raise UsageError(f"--workers must be positive, got {self.workers}")
        for name in ("enum_cap", "oracle_cap", "trials"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be positive, got {value}")
        if self.z is not None and self.z < 1:
            raise UsageError(f"--z must be at least 1, got {self.z}")

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        known = {
            "instance_path": ns.instance,
            "epsilon": settings.epsilon if ns.epsilon is None else ns.epsilon,
            "seed": settings.seed if ns.seed is None else ns.seed,
            "z": ns.z,
            "output_path": ns.out,
            "workers": ns.workers,
            "enum_cap": ns.enum_cap,
            "oracle_cap": ns.oracle_cap,
            "dump_lp": ns.dump_lp,
            "dump_trace": ns.dump_trace,
            "skip_metric_check": ns.skip_metric_check,
            "trials": ns.trials,
        }
        shared = set(vars(build_shared_parser().parse_args([])))
        options = {k: v for k, v in vars(ns).items() if k not in shared and k != "command"}
        return cls(command=ns.command, options=options, **known)


@dataclass
class CommandOutput:
    """The report document plus any side files, written only once the command has succeeded."""

    document: BaseModel
    files: List[Tuple[str, str]] = field(default_factory=list)


def build_shared_parser() -> argparse.ArgumentParser:
    """Flags accepted by every command."""
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--instance", help="Input JSON file")
    shared.add_argument("--epsilon", type=float, help="Accuracy parameter in (0, 1]")
    shared.add_argument("--seed", type=int, help="Root random seed (default 0)")
    shared.add_argument("--z", type=float, help="Override the instance exponent")
    shared.add_argument("--out", help="Write the report here instead of stdout")
    shared.add_argument("--workers", type=int, help="Worker threads; never changes the output")
    shared.add_argument("--enum-cap", dest="enum_cap", type=int, help="Largest admissible subset search")
    shared.add_argument("--oracle-cap", dest="oracle_cap", type=int, help="Largest admissible oracle search")
    shared.add_argument("--dump-lp", dest="dump_lp", metavar="PATH", help="Write the LP in text format")
    shared.add_argument("--dump-trace", dest="dump_trace", metavar="PATH", help="Write per-run rounding traces")
    shared.add_argument("--skip-metric-check", dest="skip_metric_check", action="store_true")
    shared.add_argument("--trials", type=int, help="Monte-Carlo trials for stats")
    shared.add_argument("--log-level", dest="log_level", help="Logging level (default from settings)")
    return shared


async def load_instance(cfg: RunConfig, check_metric: Optional[bool] = None) -> Instance:
    """
    Load ``--instance`` with the ``--z`` override and, unless skipped, validate its metric.

    Raises:
        UsageError: If no instance path was given
        DocumentError: If the file cannot be read or parsed
        InstanceError: If the instance or its metric is invalid
    """
    if not cfg.instance_path:
        raise UsageError(f"{cfg.command} requires --instance")
    inst = await document_store.load_instance(cfg.instance_path, z=cfg.z)
    check = not cfg.skip_metric_check if check_metric is None else check_metric
    if check:
        report = validate_metric(inst, seed=cfg.seed)
        if not report.ok:
            logger.error(f"Metric check failed with {report.violations} violations, e.g. {report.examples[:3]}")
            raise InstanceError(
                f"Distance function is not a metric: {report.violations} violations "
                f"(first: {report.examples[0] if report.examples else 'n/a'}); "
                "run 'validate' for details or pass --skip-metric-check"
            )
    return inst
