"""
Randomized rounding of the fractional solution into a bi-criteria centre set.

One run of the subroutine has two phases. Phase one repeats ``t = ⌈k ln(2cn/ε)⌉`` times:
sample a facility ``f*`` with probability ``y_f / k``, then assign every still-unassigned
point ``p`` to ``f*`` independently with probability ``x_{f*,p} / y_{f*}``. Phase two sends
the survivors to the O(ℓ)-approximation's centres. Every unassigned point is picked up with
probability exactly ``1/k`` per iteration, so it survives ``i`` iterations with probability
``(1 - 1/k)^i``.

Amplification unions ``r = ⌈8 ln n / ε⌉`` independent runs.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from fairclust.core.costs import group_costs, nearest_centers
from fairclust.core.instance import CenterSet, Instance
from fairclust.services.baseline import BaselineService, approximation_constant, baseline_service
from fairclust.services.lp import FractionalSolution, lp_service
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
PRECONDITION_TOLERANCE = 1e-6
MIN_TRIALS = 100


class RoundingError(Exception):
    """Custom exception for rounding failures."""
    pass


def mix_seed(seed: int, counter: int) -> int:
    """splitmix64 of ``seed + (counter + 1) * golden``; independent per-run seeds."""
    z = (seed + (counter + 1) * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def phase_two_constant(z: float) -> float:
    """``c = max(c', 1)`` with ``c'`` the factor of the phase-two approximation."""
    return max(approximation_constant(z), 1.0)


def iteration_count(k: int, n: int, epsilon: float, c: float) -> int:
    """Phase-one iterations ``⌈k ln(2cn/ε)⌉``."""
    return max(1, math.ceil(k * math.log(2.0 * c * n / epsilon)))


def repetition_count(n: int, epsilon: float) -> int:
    """Independent runs ``⌈8 ln n / ε⌉`` (at least one)."""
    return max(1, math.ceil(8.0 * math.log(n) / epsilon))


@dataclass
class IterationRecord:
    facility: str
    assigned: Tuple[str, ...]


@dataclass
class RoundingTrace:
    iterations: List[IterationRecord] = field(default_factory=list)
    unassigned_after: List[int] = field(default_factory=list)
    phase2_points: Tuple[str, ...] = ()
    phase2_centers: CenterSet = field(default_factory=lambda: CenterSet(()))
    assignment: Dict[str, str] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "iterations": [{"facility": r.facility, "assigned": list(r.assigned)} for r in self.iterations],
            "unassigned_after": list(self.unassigned_after),
            "phase2_points": list(self.phase2_points),
            "phase2_centers": list(self.phase2_centers.centers),
            "assignment": dict(sorted(self.assignment.items())),
        }


@dataclass
class AmplifyReport:
    epsilon: float
    runs: int
    iterations_per_run: int
    seeds: List[int]
    run_sizes: List[int]
    size: int
    size_bound: int
    traces: List[RoundingTrace]


@dataclass(frozen=True)
class GroupExpectation:
    means: Tuple[float, ...]
    stderrs: Tuple[float, ...]
    n_trials: int


@dataclass(frozen=True)
class SurvivalEstimate:
    """Empirical ``Pr[p unassigned after i iterations]`` against ``(1 - 1/k)^i``."""

    iterations: Tuple[int, ...]
    points: Tuple[str, ...]
    empirical: np.ndarray
    stderr: np.ndarray
    expected: Tuple[float, ...]
    n_trials: int


@dataclass(eq=False)
class _Prepared:
    inst: Instance
    epsilon: float
    t: int
    y: np.ndarray
    cdf: np.ndarray
    ratio: np.ndarray
    phase2_centers: CenterSet
    phase2_rows: np.ndarray


class RoundingService:
    """The randomized subroutine, its amplification and Monte-Carlo estimators."""

    def __init__(self, baseline: Optional[BaselineService] = None, workers: Optional[int] = None):
        self.baseline = baseline or baseline_service
        self.workers = workers

    # Closed forms

    @staticmethod
    def sampling_distribution(frac: FractionalSolution) -> np.ndarray:
        """``y_f / k`` over facilities in declared order."""
        return frac.y_values / frac.instance.k

    @staticmethod
    def assignment_probability(frac: FractionalSolution, point: str) -> float:
        """Per-iteration chance that an unassigned ``point`` is assigned: ``Σ_f (x_{f,p}/y_f)(y_f/k)``."""
        inst = frac.instance
        p = inst.point_index[point]
        y = frac.y_values
        open_ = y > 0
        ratio = np.zeros_like(y)
        ratio[open_] = frac.x_values[open_, p] / y[open_]
        return float(np.sum(ratio * y / inst.k))

    # Preparation

    def prepare(self, inst: Instance, frac: FractionalSolution, epsilon: float) -> _Prepared:
        """
        Validate the inputs once and precompute sampling tables.

        Raises:
            RoundingError: If ``ε`` is outside ``(0, 1]``, the groups overlap, or ``frac``
                fails the feasibility check
        """
        if not 0 < epsilon <= 1:
            raise RoundingError(f"epsilon must lie in (0, 1], got {epsilon}")
        if not inst.groups_disjoint():
            raise RoundingError("Groups overlap; apply split_overlapping_groups first")
        if frac.x_values.shape != (inst.n_facilities, inst.n_points):
            raise RoundingError("Fractional solution does not match the instance")

        model = lp_service.build_model(inst)
        report = lp_service.check_feasibility(frac, model, tolerance=PRECONDITION_TOLERANCE)
        for family in ("opening", "assignment", "linking", "nonnegativity"):
            if getattr(report, family) > PRECONDITION_TOLERANCE:
                logger.error(f"Fractional solution infeasible: {report.as_dict()}")
                raise RoundingError(f"Fractional solution violates the {family} rows: {report.violated_rows[:5]}")

        y = np.clip(frac.y_values, 0.0, None)
        distribution = y / inst.k
        total = float(np.sum(distribution))
        if abs(total - 1.0) > PRECONDITION_TOLERANCE:
            raise RoundingError(f"Sampling distribution sums to {total}, not 1")
        cdf = np.cumsum(distribution)

        x = np.clip(frac.x_values, 0.0, None)
        column_sums = x.sum(axis=0)
        drift = np.abs(column_sums - 1.0)
        if np.any(drift > 1e-12):
            logger.warning(
                f"Renormalised {int(np.count_nonzero(drift > 1e-12))} assignment columns (max drift {drift.max():.2e})"
            )
        x = x / column_sums[None, :]

        ratio = np.zeros_like(x)
        open_ = y > 0
        ratio[open_] = np.minimum(x[open_] / y[open_, None], 1.0)

        c = phase_two_constant(inst.z)
        t = iteration_count(inst.k, inst.n, epsilon, c)
        phase2 = self.baseline.ell_approx(inst)
        _, phase2_rows = nearest_centers(inst, phase2)
        logger.debug(f"Rounding prepared: t={t}, c={c:g}, phase-two centres {phase2.centers}")
        return _Prepared(inst, epsilon, t, y, cdf, ratio, phase2, phase2_rows)

    # One run

    def _phase_one(self, prep: _Prepared, rng: np.random.Generator, iterations: int):
        """Yield ``(facility index, newly assigned point indices, unassigned mask)`` per iteration."""
        unassigned = np.ones(prep.inst.n_points, dtype=bool)
        for _ in range(iterations):
            f = int(np.searchsorted(prep.cdf, rng.random() * prep.cdf[-1], side="right"))
            f = min(f, len(prep.cdf) - 1)
            if prep.y[f] <= 0:
                raise RoundingError(f"Sampled facility {prep.inst.facilities[f]} with zero opening")
            idx = np.flatnonzero(unassigned)
            hit = rng.random(idx.size) < prep.ratio[f, idx]
            newly = idx[hit]
            unassigned[newly] = False
            yield f, newly, unassigned

    def _run(self, prep: _Prepared, seed: int, record: bool) -> Tuple[CenterSet, Optional[RoundingTrace]]:
        inst = prep.inst
        rng = np.random.default_rng(seed)
        sampled = set()
        trace = RoundingTrace(phase2_centers=prep.phase2_centers) if record else None
        unassigned = None
        for f, newly, unassigned in self._phase_one(prep, rng, prep.t):
            sampled.add(inst.facilities[f])
            if record:
                points = tuple(inst.points[i] for i in newly)
                trace.iterations.append(IterationRecord(inst.facilities[f], points))
                trace.unassigned_after.append(int(np.count_nonzero(unassigned)))
                for p in points:
                    trace.assignment[p] = inst.facilities[f]

        if record:
            survivors = np.flatnonzero(unassigned)
            trace.phase2_points = tuple(inst.points[i] for i in survivors)
            for i in survivors:
                trace.assignment[inst.points[i]] = inst.facilities[prep.phase2_rows[i]]
        return CenterSet.of(sampled).union(prep.phase2_centers), trace

    def randomized_subroutine(
        self, inst: Instance, frac: FractionalSolution, epsilon: float, rng_seed: int
    ) -> Tuple[CenterSet, RoundingTrace]:
        """
        One run of the two-phase rounding.

        Args:
            inst: Instance with disjoint groups
            frac: Feasible fractional solution of ``inst``
            epsilon: Accuracy in ``(0, 1]``
            rng_seed: Seed of this run's random stream

        Returns:
            tuple: ``C'`` (phase-one centres plus phase-two centres) and the full trace

        Raises:
            RoundingError: On invalid inputs
        """
        prep = self.prepare(inst, frac, epsilon)
        centers, trace = self._run(prep, rng_seed, record=True)
        logger.info(f"Subroutine: {len(centers)} centres, {len(trace.phase2_points)} points left for phase two")
        return centers, trace

    def amplify(
        self,
        inst: Instance,
        frac: FractionalSolution,
        epsilon: float,
        rng_seed: int,
        workers: Optional[int] = None,
        record: bool = True,
    ) -> Tuple[CenterSet, AmplifyReport]:
        """
        Union of ``r = ⌈8 ln n / ε⌉`` independent subroutine runs.

        Run ``i`` uses seed ``mix_seed(rng_seed, i)``; runs may execute on several threads and
        the union is the same for any worker count.
        """
        prep = self.prepare(inst, frac, epsilon)
        r = repetition_count(inst.n, epsilon)
        seeds = [mix_seed(rng_seed, i) for i in range(r)]
        pool_size = workers or self.workers or settings.workers

        def one(seed: int):
            return self._run(prep, seed, record)

        if pool_size > 1:
            with ThreadPoolExecutor(max_workers=pool_size) as pool:
                results = list(pool.map(one, seeds))
        else:
            results = [one(seed) for seed in seeds]

        union = CenterSet(())
        for centers, _ in results:
            union = union.union(centers)
        report = AmplifyReport(
            epsilon=epsilon,
            runs=r,
            iterations_per_run=prep.t,
            seeds=seeds,
            run_sizes=[len(c) for c, _ in results],
            size=len(union),
            size_bound=r * (prep.t + inst.k),
            traces=[trace for _, trace in results] if record else [],
        )
        logger.info(f"Amplified {r} runs (t={prep.t}): {len(union)} centres, bound {report.size_bound}")
        return union, report

    # Estimators

    def estimate_group_expectation(
        self, inst: Instance, frac: FractionalSolution, epsilon: float, n_trials: int, rng_seed: int
    ) -> GroupExpectation:
        """Monte-Carlo mean and standard error of ``cost(C', P_j)`` for every group."""
        if n_trials < MIN_TRIALS:
            raise RoundingError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
        prep = self.prepare(inst, frac, epsilon)
        samples = np.empty((n_trials, inst.n_groups))
        for i in range(n_trials):
            centers, _ = self._run(prep, mix_seed(rng_seed, i), record=False)
            samples[i] = group_costs(centers, inst)
        means = samples.mean(axis=0)
        stderrs = samples.std(axis=0, ddof=1) / math.sqrt(n_trials)
        logger.info(f"Group expectation over {n_trials} trials: {np.round(means, 6).tolist()}")
        return GroupExpectation(tuple(float(v) for v in means), tuple(float(v) for v in stderrs), n_trials)

    def estimate_survival(
        self,
        inst: Instance,
        frac: FractionalSolution,
        epsilon: float,
        iterations: Sequence[int],
        n_trials: int,
        rng_seed: int,
    ) -> SurvivalEstimate:
        """Empirical survival probability of every point after each of ``iterations`` phase-one steps."""
        if n_trials < MIN_TRIALS:
            raise RoundingError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
        checkpoints = tuple(sorted(set(int(i) for i in iterations)))
        if not checkpoints or checkpoints[0] < 1:
            raise RoundingError("iterations must be positive")
        prep = self.prepare(inst, frac, epsilon)
        horizon = checkpoints[-1]
        position = {i: j for j, i in enumerate(checkpoints)}
        counts = np.zeros((len(checkpoints), inst.n_points))
        for trial in range(n_trials):
            rng = np.random.default_rng(mix_seed(rng_seed, trial))
            for step, (_, _, unassigned) in enumerate(self._phase_one(prep, rng, horizon), start=1):
                if step in position:
                    counts[position[step]] += unassigned
        empirical = counts / n_trials
        stderr = np.sqrt(empirical * (1 - empirical) / n_trials)
        expected = tuple((1 - 1 / inst.k) ** i for i in checkpoints)
        return SurvivalEstimate(checkpoints, inst.points, empirical, stderr, expected, n_trials)


rounding_service = RoundingService()
