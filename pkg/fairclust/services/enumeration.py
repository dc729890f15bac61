"""
Exhaustive minimisation over the k-subsets of a candidate facility list.

Subsets are visited in lexicographic order of candidate positions and cut into fixed-size
contiguous chunks. Each chunk reports its own minimum; the global minimum is the smallest
``(value, position)`` pair, so the winner is the lexicographically smallest minimiser and
does not depend on how many workers evaluated the chunks.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from fairclust.core.instance import CenterSet, Instance
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

CHUNK_SIZE = 2048
FAIR = "fair"
UNCONSTRAINED = "unconstrained"


class EnumerationCapError(Exception):
    """Custom exception for subset counts above the configured cap."""
    pass


@dataclass(frozen=True)
class EnumerationResult:
    centers: CenterSet
    value: float
    enumerated: int


def unrank(index: int, n: int, k: int) -> Tuple[int, ...]:
    """The ``index``-th k-subset of ``range(n)`` in lexicographic order."""
    combo = []
    start = 0
    for slot in range(k):
        for candidate in range(start, n):
            block = math.comb(n - candidate - 1, k - slot - 1)
            if index < block:
                combo.append(candidate)
                start = candidate + 1
                break
            index -= block
    return tuple(combo)


def combinations_from(first: Tuple[int, ...], n: int, count: int) -> Iterator[Tuple[int, ...]]:
    """``count`` consecutive lexicographic k-subsets of ``range(n)`` starting at ``first``."""
    combo = list(first)
    k = len(combo)
    for _ in range(count):
        yield tuple(combo)
        i = k - 1
        while i >= 0 and combo[i] == n - k + i:
            i -= 1
        if i < 0:
            return
        combo[i] += 1
        for j in range(i + 1, k):
            combo[j] = combo[j - 1] + 1


class SubsetEnumerator:
    """Chunked exhaustive search over k-subsets of a candidate list."""

    def __init__(self, workers: Optional[int] = None, chunk_size: int = CHUNK_SIZE):
        self.workers = workers or settings.workers
        self.chunk_size = chunk_size

    def minimise(
        self,
        inst: Instance,
        candidates: Sequence[str],
        k: int,
        cap: int,
        objective: str = FAIR,
        workers: Optional[int] = None,
    ) -> EnumerationResult:
        """
        Find the k-subset of ``candidates`` with the smallest objective.

        Args:
            inst: Instance supplying costs and groups
            candidates: Facility identifiers; enumerated in canonical (sorted) order
            k: Subset size
            cap: Largest admissible number of subsets
            objective: ``"fair"`` (max over groups) or ``"unconstrained"`` (sum over groups)
            workers: Thread count for chunk evaluation

        Returns:
            EnumerationResult: The minimising subset, its value as evaluated here and the
            number of subsets visited

        Raises:
            EnumerationCapError: If ``C(len(candidates), k)`` exceeds ``cap``
            ValueError: If fewer than ``k`` candidates are given
        """
        ordered = sorted(set(candidates))
        n = len(ordered)
        if n < k:
            raise ValueError(f"Need at least k={k} candidates, got {n}")
        total = math.comb(n, k)
        if total > cap:
            logger.error(f"Subset enumeration of C({n},{k})={total} exceeds cap {cap}")
            raise EnumerationCapError(
                f"C({n},{k}) = {total} subsets exceeds the enumeration cap {cap}; "
                "use a larger epsilon, a smaller k or raise the cap"
            )

        rows = np.array([inst.facility_index[c] for c in ordered], dtype=int)
        costs = inst.cost_matrix[rows]
        starts = inst.memberships.starts
        chunks = [(start, min(self.chunk_size, total - start)) for start in range(0, total, self.chunk_size)]

        def evaluate(chunk: Tuple[int, int]) -> Tuple[float, int]:
            start, count = chunk
            combos = np.array(list(combinations_from(unrank(start, n, k), n, count)), dtype=int)
            member_costs = np.min(costs[combos], axis=1)
            per_group = np.add.reduceat(member_costs, starts, axis=1)
            values = np.max(per_group, axis=1) if objective == FAIR else np.sum(per_group, axis=1)
            best = int(np.argmin(values))
            return float(values[best]), start + best

        pool_size = workers or self.workers
        if pool_size > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=pool_size) as pool:
                results: List[Tuple[float, int]] = list(pool.map(evaluate, chunks))
        else:
            results = [evaluate(chunk) for chunk in chunks]

        value, position = min(results)
        best = CenterSet.of(ordered[i] for i in unrank(position, n, k))
        logger.debug(f"Enumerated {total} subsets of {n} candidates; best {objective} value {value:.10g}")
        return EnumerationResult(centers=best, value=value, enumerated=total)


subset_enumerator = SubsetEnumerator()
