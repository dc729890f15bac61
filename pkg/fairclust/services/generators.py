"""
Instance generators: seeded random Euclidean instances and the set-coverage reduction
whose exact optima are known (1 on YES instances, ``3^z`` on NO instances).
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import reduce
from typing import FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from fairclust.core.instance import Group, Instance
from fairclust.core.transforms import singleton_groups
from fairclust.services.enumeration import EnumerationCapError
from fairclust.utils.config import settings

logger = logging.getLogger(__name__)

__all__ = [
    "GeneratorError",
    "SetCoverageInstance",
    "exhaustive_cover_check",
    "planted_set_coverage",
    "random_euclidean",
    "random_set_coverage",
    "reduce_set_coverage",
    "singleton_groups",
]

NEAR = 1.0
APART = 2.0
FAR = 3.0


class GeneratorError(Exception):
    """Custom exception for impossible generator requests."""
    pass


@dataclass(frozen=True)
class SetCoverageInstance:
    """Universe ``U``, collection ``S_1..S_m`` and budget ``k``; ``is_yes`` is the known answer, if any."""

    universe: Tuple[str, ...]
    collection: Tuple[FrozenSet[str], ...]
    k: int
    is_yes: Optional[bool] = None

    def __post_init__(self):
        object.__setattr__(self, "universe", tuple(self.universe))
        object.__setattr__(self, "collection", tuple(frozenset(s) for s in self.collection))
        if len(set(self.universe)) != len(self.universe):
            raise GeneratorError("Universe lists an element twice")
        if self.k < 1:
            raise GeneratorError(f"k must be at least 1, got {self.k}")
        known = set(self.universe)
        for i, s in enumerate(self.collection):
            if not s <= known:
                raise GeneratorError(f"Set {i} has elements outside the universe: {sorted(s - known)[:5]}")

    @property
    def m(self) -> int:
        return len(self.collection)


def _ids(prefix: str, count: int) -> List[str]:
    width = len(str(max(count - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(count)]


def random_euclidean(
    n_points: int,
    n_facilities: int,
    dim: int,
    n_groups: int,
    k: int,
    z: float,
    weight_range: Tuple[float, float] = (1.0, 1.0),
    rng_seed: int = 0,
) -> Instance:
    """
    Points and facilities uniform in ``[0, 1]^dim``, a random partition into nonempty groups
    and weights uniform in ``weight_range``.

    Every point picks a group independently; each group left empty then takes the last member
    of the currently largest group (lowest index on ties).

    Raises:
        GeneratorError: On non-positive counts, ``k > n_facilities``, ``n_groups > n_points``
            or an invalid weight range
    """
    if min(n_points, n_facilities, dim, n_groups, k) < 1:
        raise GeneratorError("All counts must be positive")
    if k > n_facilities:
        raise GeneratorError(f"k={k} exceeds the number of facilities {n_facilities}")
    if n_groups > n_points:
        raise GeneratorError(f"Cannot split {n_points} points into {n_groups} nonempty groups")
    low, high = weight_range
    if not 0 < low <= high or not math.isfinite(high):
        raise GeneratorError(f"Weight range must satisfy 0 < low <= high, got {weight_range}")

    rng = np.random.default_rng(rng_seed)
    point_coords = rng.random((n_points, dim))
    facility_coords = rng.random((n_facilities, dim))
    labels = rng.integers(0, n_groups, size=n_points)
    weights = np.full(n_points, low) if low == high else rng.uniform(low, high, size=n_points)

    members: List[List[int]] = [[] for _ in range(n_groups)]
    for i, label in enumerate(labels):
        members[int(label)].append(i)
    for j in range(n_groups):
        if not members[j]:
            donor = max(range(n_groups), key=lambda g: (len(members[g]), -g))
            members[j].append(members[donor].pop())

    points = _ids("p", n_points)
    facilities = _ids("f", n_facilities)
    names = _ids("g", n_groups)
    groups = [
        Group(names[j], tuple(points[i] for i in sorted(idx)), tuple(float(weights[i]) for i in sorted(idx)))
        for j, idx in enumerate(members)
    ]
    coords = dict(zip(points + facilities, np.vstack([point_coords, facility_coords]).tolist()))
    inst = Instance.from_coords(points, facilities, coords, groups, k, z)
    logger.debug(f"Generated random Euclidean instance {inst.describe()} from seed {rng_seed}")
    return inst


def reduce_set_coverage(sc: SetCoverageInstance, z: float) -> Instance:
    """
    The k-supplier instance of a set-coverage instance.

    One point ``x_e`` per element and one facility ``c_i`` per set; ``d(x_e, c_i)`` is 1 when
    ``e ∈ S_i`` and 3 otherwise, all other distinct pairs are at distance 2, and every point
    forms its own unit-weight group. The optimum is 1 if some ``k`` sets cover ``U`` and ``3^z``
    otherwise.

    Raises:
        GeneratorError: If the universe is empty or ``k`` exceeds the number of sets
    """
    if not sc.universe:
        raise GeneratorError("Universe must not be empty")
    if sc.k > sc.m:
        raise GeneratorError(f"k={sc.k} exceeds the number of sets {sc.m}")

    points = [f"x_{e}" for e in sc.universe]
    facilities = _ids("c", sc.m)
    n_p = len(points)
    size = n_p + sc.m

    matrix = np.full((size, size), APART)
    for i, s in enumerate(sc.collection):
        column = np.array([NEAR if e in s else FAR for e in sc.universe])
        matrix[:n_p, n_p + i] = column
        matrix[n_p + i, :n_p] = column
    np.fill_diagonal(matrix, 0.0)

    groups = [Group.uniform(p, (p,)) for p in points]
    return Instance.from_matrix(points, facilities, matrix, groups, sc.k, z)


def exhaustive_cover_check(sc: SetCoverageInstance, cap: Optional[int] = None) -> bool:
    """
    Whether some ``k`` sets of the collection cover the universe, by trying every ``k``-subset.

    Raises:
        EnumerationCapError: If ``C(m, k)`` exceeds the cap
    """
    if not sc.universe:
        return True
    size = min(sc.k, sc.m)
    limit = settings.cover_cap if cap is None else cap
    total = math.comb(sc.m, size)
    if total > limit:
        logger.error(f"Cover check of C({sc.m},{size})={total} exceeds cap {limit}")
        raise EnumerationCapError(f"C({sc.m},{size}) = {total} subsets exceeds the cover-check cap {limit}")

    bit = {e: 1 << i for i, e in enumerate(sc.universe)}
    full = (1 << len(sc.universe)) - 1
    masks = [sum(bit[e] for e in s) for s in sc.collection]
    for combo in itertools.combinations(masks, size):
        if reduce(lambda a, b: a | b, combo, 0) == full:
            return True
    return False


def planted_set_coverage(
    universe_size: int,
    m: int,
    k: int,
    rng_seed: int = 0,
    yes: bool = True,
) -> SetCoverageInstance:
    """
    A set-coverage instance with a planted cover of ``k`` sets plus ``m - k`` random decoys.

    The planted sets partition the universe. For a NO instance one element of the first
    planted set is then removed from every set, so no subcollection covers the universe.

    Raises:
        GeneratorError: Unless ``1 <= k <= m`` and ``universe_size >= k``
    """
    if not 1 <= k <= m:
        raise GeneratorError(f"Need 1 <= k <= m, got k={k}, m={m}")
    if universe_size < k:
        raise GeneratorError(f"Cannot plant {k} nonempty sets over {universe_size} elements")

    rng = np.random.default_rng(rng_seed)
    universe = _ids("u", universe_size)
    order = rng.permutation(universe_size)
    cuts = np.sort(rng.choice(np.arange(1, universe_size), size=k - 1, replace=False)) if k > 1 else []
    planted = [set(universe[i] for i in block) for block in np.split(order, cuts)]
    decoys = [_random_subset(rng, universe, 0.5) for _ in range(m - k)]

    sets = planted + decoys
    sets = [sets[i] for i in rng.permutation(m)]
    if not yes:
        witness = min(planted[0])
        for s in sets:
            s.discard(witness)
    logger.debug(f"Planted {'YES' if yes else 'NO'} set coverage: |U|={universe_size} m={m} k={k} seed {rng_seed}")
    return SetCoverageInstance(tuple(universe), tuple(frozenset(s) for s in sets), k, is_yes=yes)


def random_set_coverage(
    universe_size: int,
    m: int,
    k: int,
    density: float = 0.3,
    rng_seed: int = 0,
) -> SetCoverageInstance:
    """Sets drawn independently, each element kept with probability ``density``; the answer is left unknown."""
    if min(universe_size, m, k) < 1:
        raise GeneratorError("universe_size, m and k must be positive")
    if not 0 <= density <= 1:
        raise GeneratorError(f"density must lie in [0, 1], got {density}")
    rng = np.random.default_rng(rng_seed)
    universe = _ids("u", universe_size)
    sets = [frozenset(_random_subset(rng, universe, density)) for _ in range(m)]
    return SetCoverageInstance(tuple(universe), tuple(sets), k)


def _random_subset(rng: np.random.Generator, universe: Sequence[str], density: float) -> set:
    keep = rng.random(len(universe)) < density
    return {e for e, kept in zip(universe, keep) if kept}
