import logging
from dataclasses import dataclass
from typing import Optional

from fairclust.core.costs import fair_cost, unconstrained_cost
from fairclust.core.instance import CenterSet, Instance
from fairclust.services.enumeration import (
    FAIR,
    UNCONSTRAINED,
    EnumerationCapError,
    SubsetEnumerator,
    subset_enumerator,
)
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)


class OracleError(Exception):
    """Custom exception for brute-force oracle failures."""
    pass


@dataclass(frozen=True)
class OracleResult:
    """An exact optimum: its cost, a minimising centre set and how many sets were tried."""

    opt_cost: float
    opt_set: CenterSet
    enumerated: int


class OracleService:
    """Exact optima by exhaustion over all k-subsets of F."""

    def __init__(self, enumerator: Optional[SubsetEnumerator] = None):
        self.enumerator = enumerator or subset_enumerator

    def brute_force_fair(self, inst: Instance, cap: Optional[int] = None, workers: Optional[int] = None) -> OracleResult:
        """
        The optimal fair cost ``OPT`` and a lexicographically smallest optimal centre set.

        Raises:
            EnumerationCapError: If ``C(n_F, k)`` exceeds the cap
        """
        result = self._search(inst, FAIR, cap, workers)
        opt_cost = fair_cost(result.centers, inst).value
        logger.info(f"Fair optimum {opt_cost:.10g} over {result.enumerated} subsets")
        return OracleResult(opt_cost=opt_cost, opt_set=result.centers, enumerated=result.enumerated)

    def brute_force_unconstrained(
        self, inst: Instance, cap: Optional[int] = None, workers: Optional[int] = None
    ) -> OracleResult:
        """The optimal unconstrained cost ``OPT_u`` (sum over groups) and a minimiser."""
        result = self._search(inst, UNCONSTRAINED, cap, workers)
        opt_cost = unconstrained_cost(result.centers, inst)
        logger.info(f"Unconstrained optimum {opt_cost:.10g} over {result.enumerated} subsets")
        return OracleResult(opt_cost=opt_cost, opt_set=result.centers, enumerated=result.enumerated)

    def _search(self, inst: Instance, objective: str, cap: Optional[int], workers: Optional[int]):
        limit = settings.oracle_cap if cap is None else cap
        try:
            return self.enumerator.minimise(inst, inst.facilities, inst.k, limit, objective=objective, workers=workers)
        except EnumerationCapError:
            raise
        except Exception as e:
            logger.error(f"Oracle search failed: {e}")
            raise OracleError(f"Oracle search failed: {e}") from e


oracle_service = OracleService()
