"""Handlers for ``baseline``, ``oracle``, ``validate`` and ``stats``."""
import asyncio
import logging
import math
import time

from fairclust.commands.common import CommandOutput, RunConfig, load_instance
from fairclust.core.costs import fair_cost, unconstrained_cost
from fairclust.core.metric import validate_metric
from fairclust.core.transforms import split_overlapping_groups
from fairclust.services.baseline import approximation_constant, baseline_service
from fairclust.services.enumeration import UNCONSTRAINED
from fairclust.services.lp import lp_service
from fairclust.services.oracle import oracle_service
from fairclust.services.rounding import rounding_service
from fairclust.storage.documents import (
    BaselineDocument,
    MetricReportDocument,
    OracleDocument,
    StatsDocument,
)
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

DEFAULT_SURVIVAL_ITERATIONS = (1, 2, 5)


async def run_baseline(cfg: RunConfig) -> CommandOutput:
    """The ``O(ℓ)``-approximation from unconstrained local search."""
    inst = await load_instance(cfg)
    started = time.perf_counter()
    centers = await asyncio.to_thread(baseline_service.ell_approx, inst)
    elapsed = time.perf_counter() - started
    document = BaselineDocument.build(
        inst,
        centers,
        fair_cost(centers, inst),
        unconstrained_cost(centers, inst),
        approximation_constant(inst.z),
        baseline_service.is_locally_optimal(inst, centers),
        {"baseline": elapsed},
    )
    return CommandOutput(document)


async def run_oracle(cfg: RunConfig) -> CommandOutput:
    inst = await load_instance(cfg)
    objective = cfg.options.get("objective") or "fair"
    search = oracle_service.brute_force_unconstrained if objective == UNCONSTRAINED else oracle_service.brute_force_fair
    started = time.perf_counter()
    result = await asyncio.to_thread(search, inst, cfg.oracle_cap, cfg.workers)
    elapsed = time.perf_counter() - started
    return CommandOutput(OracleDocument.from_result(result, inst, objective, {"oracle": elapsed}))


async def run_validate(cfg: RunConfig) -> CommandOutput:
    """Metric report; violations are reported, not treated as an error."""
    inst = await load_instance(cfg, check_metric=False)
    report = await asyncio.to_thread(validate_metric, inst, None, None, cfg.seed)
    return CommandOutput(MetricReportDocument.from_report(report))


async def run_stats(cfg: RunConfig) -> CommandOutput:
    """
    Monte-Carlo check of the randomized subroutine: survival of a point through the
    first iterations against ``(1 - 1/k)^i``, and the expected per-group cost against
    ``(1 + ε/2)·OPT`` when the optimum is affordable.
    """
    inst = await load_instance(cfg)
    trials = cfg.trials or settings.stats_trials
    iterations = cfg.options.get("iterations") or DEFAULT_SURVIVAL_ITERATIONS
    times = {}

    started = time.perf_counter()
    disjoint = split_overlapping_groups(inst)
    frac = await asyncio.to_thread(lambda: lp_service.solve(lp_service.build_model(disjoint)))
    times["lp"] = time.perf_counter() - started

    started = time.perf_counter()
    survival = await asyncio.to_thread(
        rounding_service.estimate_survival, disjoint, frac, cfg.epsilon, iterations, trials, cfg.seed
    )
    expectation = await asyncio.to_thread(
        rounding_service.estimate_group_expectation, disjoint, frac, cfg.epsilon, trials, cfg.seed
    )
    times["monte_carlo"] = time.perf_counter() - started

    oracle_opt = None
    limit = settings.oracle_cap if cfg.oracle_cap is None else cfg.oracle_cap
    if math.comb(inst.n_facilities, inst.k) <= limit:
        started = time.perf_counter()
        oracle_opt = oracle_service.brute_force_fair(inst, cap=limit, workers=cfg.workers).opt_cost
        times["oracle"] = time.perf_counter() - started

    document = StatsDocument.build(
        disjoint, cfg.epsilon, cfg.seed, frac.gamma, survival, expectation, oracle_opt, times
    )
    return CommandOutput(document)
