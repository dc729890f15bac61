"""
From a bi-criteria centre set to exactly ``k`` centres.

Some ``k``-subset of an ``α``-approximate centre set ``C`` is a ``3^(z-1)(α+2)``-approximation
(take the member of ``C`` nearest to each optimal centre), so trying every ``k``-subset of
``C`` and keeping the cheapest is enough. With ``α = 1 + ε`` and ``ε = ε' / 3^(z-1)`` the
whole pipeline is a ``(3^z + ε')``-approximation.
"""
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from fairclust.core.costs import FairCost, fair_cost
from fairclust.core.instance import CenterSet, Instance
from fairclust.core.transforms import split_overlapping_groups
from fairclust.services.enumeration import FAIR, SubsetEnumerator, subset_enumerator
from fairclust.services.lp import FractionalSolution, LPModel, lp_service
from fairclust.services.oracle import oracle_service
from fairclust.services.rounding import AmplifyReport, rounding_service
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)


class FPTError(Exception):
    """Custom exception for pipeline failures."""
    pass


@dataclass
class BicriteriaResult:
    centers: CenterSet
    cost: FairCost
    gamma_star: float
    amplify: AmplifyReport
    model: LPModel
    fractional: FractionalSolution
    epsilon: float
    rng_seed: int
    wall_times: Dict[str, float] = field(default_factory=dict)

    @property
    def beta(self) -> float:
        """Size blow-up ``|C| / k``."""
        return len(self.centers) / self.fractional.instance.k


@dataclass
class SolveReport:
    solution: CenterSet
    fair_cost: float
    per_group_costs: Tuple[float, ...]
    argmax_group: int
    bicriteria_set_size: int
    subsets_enumerated: int
    gamma_star: float
    oracle_opt: Optional[float]
    epsilon_requested: float
    epsilon_internal: float
    rng_seed: int
    k: int
    z: float
    amplify_runs: int
    iterations_per_run: int
    lp_pivots: int
    wall_times: Dict[str, float] = field(default_factory=dict)
    bicriteria: Optional[BicriteriaResult] = None


def internal_epsilon(epsilon_prime: float, z: float) -> float:
    """``ε = ε' / 3^(z-1)``."""
    return epsilon_prime / 3.0 ** (z - 1)


class FPTService:
    """Subset search over a bi-criteria solution and the end-to-end pipeline."""

    def __init__(self, enumerator: Optional[SubsetEnumerator] = None):
        self.enumerator = enumerator or subset_enumerator

    def subset_search(
        self,
        inst: Instance,
        big: CenterSet,
        k: Optional[int] = None,
        cap: Optional[int] = None,
        workers: Optional[int] = None,
    ) -> Tuple[CenterSet, float]:
        """
        The cheapest ``k``-subset of ``big`` under the fair cost.

        Args:
            inst: Instance to evaluate on
            big: Candidate centres, at least ``k`` of them
            k: Subset size; defaults to ``inst.k``
            cap: Largest admissible ``C(|big|, k)``
            workers: Threads for chunk evaluation

        Returns:
            tuple: The minimiser (lexicographically smallest on ties) and its fair cost

        Raises:
            FPTError: If ``|big| < k``
            EnumerationCapError: If the subset count exceeds ``cap``
        """
        k = inst.k if k is None else k
        if len(big) < k:
            logger.error(f"Subset search needs {k} candidates, got {len(big)}")
            raise FPTError(f"Candidate set has {len(big)} centres, fewer than k={k}")
        limit = settings.enum_cap if cap is None else cap
        result = self.enumerator.minimise(inst, big.centers, k, limit, objective=FAIR, workers=workers)
        cost = fair_cost(result.centers, inst).value
        logger.info(f"Subset search: C({len(big)},{k})={result.enumerated} subsets, best fair cost {cost:.10g}")
        return result.centers, cost

    @staticmethod
    def project_onto(inst: Instance, big: CenterSet, optimal: CenterSet) -> CenterSet:
        """Replace every centre of ``optimal`` by its nearest member of ``big`` (smallest identifier on ties)."""
        offset = inst.n_points
        big_rows = inst.facility_rows(big)
        picked = []
        for c in optimal:
            d = inst.matrix[offset + inst.facility_index[c], offset + big_rows]
            picked.append(big.centers[int(np.argmin(d))])
        return CenterSet.of(picked)

    def bicriteria(
        self,
        inst: Instance,
        epsilon: float,
        rng_seed: int,
        workers: Optional[int] = None,
        record: bool = False,
    ) -> BicriteriaResult:
        """
        LP relaxation followed by amplified rounding: a ``(β, 1+ε)`` bi-criteria solution.

        Overlapping groups are split first; the returned cost is evaluated on ``inst`` itself.
        """
        if not 0 < epsilon <= 1:
            raise FPTError(f"epsilon must lie in (0, 1], got {epsilon}")
        times: Dict[str, float] = {}

        started = time.perf_counter()
        disjoint = split_overlapping_groups(inst)
        model = lp_service.build_model(disjoint)
        frac = lp_service.solve(model)
        times["lp"] = time.perf_counter() - started

        started = time.perf_counter()
        centers, report = rounding_service.amplify(disjoint, frac, epsilon, rng_seed, workers=workers, record=record)
        times["rounding"] = time.perf_counter() - started

        return BicriteriaResult(
            centers=centers,
            cost=fair_cost(centers, inst),
            gamma_star=frac.gamma,
            amplify=report,
            model=model,
            fractional=frac,
            epsilon=epsilon,
            rng_seed=rng_seed,
            wall_times=times,
        )

    def solve(
        self,
        inst: Instance,
        epsilon_prime: float,
        rng_seed: int = 0,
        workers: Optional[int] = None,
        enum_cap: Optional[int] = None,
        oracle_cap: Optional[int] = None,
        record: bool = False,
    ) -> SolveReport:
        """
        The full pipeline: split groups, solve the LP, amplify with ``ε = ε'/3^(z-1)``, search
        the ``k``-subsets and, when ``C(n_F, k)`` is within the oracle cap, attach the exact optimum.

        Raises:
            FPTError: If ``ε'`` is outside ``(0, 1]``
            EnumerationCapError: If the subset search exceeds ``enum_cap``
        """
        if not 0 < epsilon_prime <= 1:
            raise FPTError(f"epsilon must lie in (0, 1], got {epsilon_prime}")
        epsilon = internal_epsilon(epsilon_prime, inst.z)
        logger.info(f"Solving {inst.describe()} with eps'={epsilon_prime:g} (internal {epsilon:.6g}), seed {rng_seed}")

        stage = self.bicriteria(inst, epsilon, rng_seed, workers=workers, record=record)
        times = dict(stage.wall_times)
        disjoint = stage.fractional.instance

        started = time.perf_counter()
        solution, _ = self.subset_search(disjoint, stage.centers, inst.k, cap=enum_cap, workers=workers)
        times["subset_search"] = time.perf_counter() - started
        cost = fair_cost(solution, inst)

        oracle_opt = None
        limit = settings.oracle_cap if oracle_cap is None else oracle_cap
        if math.comb(inst.n_facilities, inst.k) <= limit:
            started = time.perf_counter()
            oracle_opt = oracle_service.brute_force_fair(inst, cap=limit, workers=workers).opt_cost
            times["oracle"] = time.perf_counter() - started

        logger.info(f"Solution {solution.centers}: fair cost {cost.value:.10g} (gamma* {stage.gamma_star:.10g})")
        return SolveReport(
            solution=solution,
            fair_cost=cost.value,
            per_group_costs=cost.group_costs,
            argmax_group=cost.argmax_group,
            bicriteria_set_size=len(stage.centers),
            subsets_enumerated=math.comb(len(stage.centers), inst.k),
            gamma_star=stage.gamma_star,
            oracle_opt=oracle_opt,
            epsilon_requested=epsilon_prime,
            epsilon_internal=epsilon,
            rng_seed=rng_seed,
            k=inst.k,
            z=inst.z,
            amplify_runs=stage.amplify.runs,
            iterations_per_run=stage.amplify.iterations_per_run,
            lp_pivots=stage.fractional.certificate.pivots if stage.fractional.certificate else 0,
            wall_times=times,
            bicriteria=stage,
        )


fpt_service = FPTService()
