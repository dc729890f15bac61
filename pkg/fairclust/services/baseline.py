import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from fairclust.core.instance import CenterSet, Instance
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)


class BaselineError(Exception):
    """Custom exception for baseline clustering failures."""
    pass


@dataclass(frozen=True)
class BaselineConfig:
    max_swap_rounds: int
    improvement_threshold: float

    def __post_init__(self):
        if self.max_swap_rounds < 1:
            raise BaselineError("max_swap_rounds must be positive")
        if not 0 < self.improvement_threshold < 1:
            raise BaselineError("improvement_threshold must lie in (0, 1)")

    @classmethod
    def from_settings(cls) -> "BaselineConfig":
        return cls(settings.max_swap_rounds, settings.improvement_threshold)


def approximation_constant(z: float) -> float:
    """
    Approximation factor ``c'`` of single-swap local search for the unconstrained objective:
    5 for k-median, 25 for k-means and ``5 * 3^z`` for any other exponent.
    """
    if z == 1:
        return 5.0
    if z == 2:
        return 25.0
    return 5.0 * 3.0 ** z


class BaselineService:
    """Single-swap local search and the O(ℓ)-approximation it yields for the fair objective."""

    def __init__(self, config: Optional[BaselineConfig] = None):
        self.config = config

    def _config(self, cfg: Optional[BaselineConfig]) -> BaselineConfig:
        return cfg or self.config or BaselineConfig.from_settings()

    def farthest_point_seed(self, inst: Instance, k: int) -> List[int]:
        """Greedy farthest-point seeding over F, starting at the smallest identifier."""
        order = [inst.facility_index[f] for f in inst.canonical_facilities]
        ff = inst.matrix[inst.n_points:, inst.n_points:]
        chosen = [order[0]]
        nearest = ff[order[0]].copy()
        while len(chosen) < k:
            # argmax over canonical order keeps the smallest identifier on ties
            masked = np.array([-1.0 if f in chosen else nearest[f] for f in order])
            pick = order[int(np.argmax(masked))]
            chosen.append(pick)
            nearest = np.minimum(nearest, ff[pick])
        return chosen

    def unconstrained_local_search(
        self, inst: Instance, k: Optional[int] = None, cfg: Optional[BaselineConfig] = None
    ) -> CenterSet:
        """
        Single-swap local search for ``Σ_j cost(C, P_j)``.

        Each round applies the best single swap (largest improvement, ties to the smallest
        ``(removed, added)`` identifier pair) as long as it improves the cost by more than the
        configured fraction.

        Args:
            inst: Instance to cluster
            k: Number of centres; defaults to ``inst.k``
            cfg: Swap-round limit and improvement threshold

        Returns:
            CenterSet: ``k`` facilities, locally optimal up to the threshold

        Raises:
            BaselineError: If ``k`` is outside ``[1, n_F]``
        """
        k = inst.k if k is None else k
        cfg = self._config(cfg)
        if not 1 <= k <= inst.n_facilities:
            logger.error(f"Local search asked for k={k} with {inst.n_facilities} facilities")
            raise BaselineError(f"k must satisfy 1 <= k <= {inst.n_facilities}, got {k}")

        costs = inst.cost_matrix
        current = self.farthest_point_seed(inst, k)
        current_cost = float(np.sum(np.min(costs[current], axis=0)))

        rounds = 0
        while rounds < cfg.max_swap_rounds and current_cost > 0:
            swap, new_cost = self._best_swap(inst, current, costs)
            if swap is None or current_cost - new_cost <= cfg.improvement_threshold * current_cost:
                break
            out, into = swap
            current = [into if f == out else f for f in current]
            current_cost = new_cost
            rounds += 1
        else:
            if rounds >= cfg.max_swap_rounds:
                logger.warning(f"Local search stopped after {rounds} swap rounds")

        centers = CenterSet.of(inst.facilities[f] for f in current)
        logger.info(f"Local search: k={k}, {rounds} swaps, unconstrained cost {current_cost:.10g}")
        return centers

    @staticmethod
    def _best_swap(inst: Instance, current: List[int], costs: np.ndarray):
        """Best ``(removed, added)`` facility-index pair and the cost after that swap."""
        by_id = sorted(current, key=lambda f: inst.facilities[f])
        outside = [inst.facility_index[f] for f in inst.canonical_facilities if inst.facility_index[f] not in current]
        if not outside:
            return None, float(np.sum(np.min(costs[current], axis=0)))

        best_swap, best_cost = None, np.inf
        for out in by_id:
            rest = [f for f in current if f != out]
            base = np.min(costs[rest], axis=0) if rest else np.full(costs.shape[1], np.inf)
            totals = np.sum(np.minimum(base[None, :], costs[outside]), axis=1)
            i = int(np.argmin(totals))
            if totals[i] < best_cost:
                best_swap, best_cost = (out, outside[i]), float(totals[i])
        return best_swap, best_cost

    def is_locally_optimal(self, inst: Instance, centers: CenterSet, threshold: Optional[float] = None) -> bool:
        """True when no single swap lowers the unconstrained cost by more than ``threshold`` (relative)."""
        threshold = self._config(None).improvement_threshold if threshold is None else threshold
        current = [inst.facility_index[c] for c in centers]
        costs = inst.cost_matrix
        current_cost = float(np.sum(np.min(costs[current], axis=0)))
        _, best = self._best_swap(inst, current, costs)
        return current_cost - best <= threshold * current_cost

    def ell_approx(self, inst: Instance, cfg: Optional[BaselineConfig] = None) -> CenterSet:
        """
        O(ℓ)-approximation for the fair objective: the local-search solution of the
        unconstrained problem, whose fair cost is at most ``c' · ℓ · OPT``.
        """
        try:
            return self.unconstrained_local_search(inst, inst.k, cfg)
        except BaselineError:
            raise
        except Exception as e:
            logger.error(f"O(l)-approximation failed: {e}")
            raise BaselineError(f"O(l)-approximation failed: {e}") from e

    @staticmethod
    def ell_bound(inst: Instance) -> float:
        """``c' · ℓ``, the proven factor of :meth:`ell_approx`."""
        return approximation_constant(inst.z) * inst.n_groups


baseline_service = BaselineService()
