"""Handlers for ``gen``: random instances, the set-coverage reduction and singleton groups."""
import logging

from fairclust.commands.common import CommandOutput, RunConfig, UsageError, load_instance
from fairclust.services.generators import (
    planted_set_coverage,
    random_euclidean,
    reduce_set_coverage,
    singleton_groups,
)
from fairclust.storage.documents import InstanceDocument, SetCoverageDocument, document_store

logger = logging.getLogger(__name__)

GEN_KINDS = ("euclidean", "setcover-reduce", "singleton", "setcover-planted")


async def run_gen(cfg: RunConfig) -> CommandOutput:
    kind = cfg.options.get("kind")
    opts = cfg.options
    z = 1.0 if cfg.z is None else cfg.z

    if kind == "euclidean":
        inst = random_euclidean(
            opts["n_points"],
            opts["n_facilities"],
            opts["dim"],
            opts["groups"],
            opts["k"],
            z,
            weight_range=(opts["weight_min"], opts["weight_max"]),
            rng_seed=cfg.seed,
        )
        return CommandOutput(InstanceDocument.from_instance(inst))

    if kind == "setcover-reduce":
        if not cfg.instance_path:
            raise UsageError("gen setcover-reduce requires --instance (a set-coverage document)")
        sc = await document_store.load_set_coverage(cfg.instance_path)
        return CommandOutput(InstanceDocument.from_instance(reduce_set_coverage(sc, z)))

    if kind == "singleton":
        inst = await load_instance(cfg, check_metric=False)
        return CommandOutput(InstanceDocument.from_instance(singleton_groups(inst)))

    if kind == "setcover-planted":
        sc = planted_set_coverage(opts["universe"], opts["sets"], opts["k"], rng_seed=cfg.seed, yes=not opts["no"])
        return CommandOutput(SetCoverageDocument.from_instance(sc))

    raise UsageError(f"gen needs one of {', '.join(GEN_KINDS)}")
