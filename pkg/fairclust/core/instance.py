"""
Problem representation for socially fair clustering.

An :class:`Instance` bundles the points ``P``, the candidate centres ``F``, a metric over
``P ⊕ F`` (declared order: all points first, then all facilities), the weighted groups,
the number of centres ``k`` and the exponent ``z``.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class InstanceError(Exception):
    """Custom exception for malformed instances and centre sets."""
    pass


class EmptyCenterSetError(InstanceError):
    """Raised when a cost is requested for an empty centre set."""

    def __init__(self):
        super().__init__("empty center set")


@dataclass(frozen=True)
class Group:
    """A weighted group ``P_j`` with weight function ``w_j``."""

    name: str
    members: Tuple[str, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.members:
            raise InstanceError(f"Group {self.name!r} has no members")
        if len(self.members) != len(self.weights):
            raise InstanceError(
                f"Group {self.name!r} has {len(self.members)} members but {len(self.weights)} weights"
            )
        if len(set(self.members)) != len(self.members):
            raise InstanceError(f"Group {self.name!r} lists a member twice")
        for member, weight in zip(self.members, self.weights):
            if not math.isfinite(weight) or weight <= 0:
                raise InstanceError(f"Group {self.name!r}: weight of {member!r} must be positive and finite, got {weight}")

    @classmethod
    def uniform(cls, name: str, members: Sequence[str], weight: float = 1.0) -> "Group":
        return cls(name, tuple(members), tuple(weight for _ in members))

    def weight_map(self) -> Dict[str, float]:
        return dict(zip(self.members, self.weights))


@dataclass(frozen=True)
class CenterSet:
    """A canonical (deduplicated, identifier-sorted) collection of facility identifiers."""

    centers: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(sorted(set(self.centers))))

    @classmethod
    def of(cls, ids: Iterable[str]) -> "CenterSet":
        return cls(tuple(ids))

    def __len__(self) -> int:
        return len(self.centers)

    def __iter__(self):
        return iter(self.centers)

    def __contains__(self, item) -> bool:
        return item in self.centers

    def union(self, other: "CenterSet") -> "CenterSet":
        return CenterSet(self.centers + other.centers)

    def issubset(self, other: "CenterSet") -> bool:
        return set(self.centers) <= set(other.centers)


@dataclass(frozen=True)
class AssignedPoint:
    """One entry of an :class:`Assignment`.

    ``cost`` is ``distance ** z`` times the point's total weight over the groups that contain it
    (its single group weight once groups are disjoint).
    """

    center: str
    distance: float
    cost: float


@dataclass(frozen=True)
class Assignment:
    """Point to centre map together with the per-group costs it induces."""

    points: Dict[str, AssignedPoint]
    group_costs: Tuple[float, ...]

    def center_of(self, point: str) -> str:
        return self.points[point].center

    def clusters(self) -> Dict[str, List[str]]:
        out: Dict[str, List[str]] = {}
        for point, entry in self.points.items():
            out.setdefault(entry.center, []).append(point)
        return out


@dataclass(frozen=True, eq=False)
class Instance:
    """
    A socially fair clustering instance.

    ``matrix`` is the full symmetric distance matrix over ``points ⊕ facilities``. When the
    instance was built from coordinates, ``coords`` holds one row per element in the same
    order and ``matrix`` is the derived Euclidean matrix.
    """

    points: Tuple[str, ...]
    facilities: Tuple[str, ...]
    matrix: np.ndarray
    groups: Tuple[Group, ...]
    k: int
    z: float
    coords: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        object.__setattr__(self, "facilities", tuple(self.facilities))
        object.__setattr__(self, "groups", tuple(self.groups))
        matrix = np.array(self.matrix, dtype=float)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        if self.coords is not None:
            coords = np.array(self.coords, dtype=float)
            coords.setflags(write=False)
            object.__setattr__(self, "coords", coords)
        self._check()

    def _check(self) -> None:
        if not self.points:
            raise InstanceError("Instance needs at least one point")
        if not self.facilities:
            raise InstanceError("Instance needs at least one facility")
        if len(set(self.points)) != len(self.points):
            raise InstanceError("Point identifiers must be unique")
        if len(set(self.facilities)) != len(self.facilities):
            raise InstanceError("Facility identifiers must be unique")

        size = self.n_points + self.n_facilities
        if self.matrix.shape != (size, size):
            raise InstanceError(f"Distance matrix must be {size}x{size}, got {self.matrix.shape}")
        if not np.all(np.isfinite(self.matrix)):
            raise InstanceError("Distance matrix contains non-finite entries")

        if not self.groups:
            raise InstanceError("Instance needs at least one group")
        known = set(self.points)
        for group in self.groups:
            unknown = [m for m in group.members if m not in known]
            if unknown:
                raise InstanceError(f"Group {group.name!r} references unknown points: {unknown[:5]}")

        if isinstance(self.k, bool) or int(self.k) != self.k:
            raise InstanceError(f"k must be an integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))
        if not 1 <= self.k <= self.n_facilities:
            raise InstanceError(f"k must satisfy 1 <= k <= {self.n_facilities}, got {self.k}")
        if not math.isfinite(self.z) or self.z < 1:
            raise InstanceError(f"z must be a real >= 1, got {self.z}")
        object.__setattr__(self, "z", float(self.z))

    # Construction helpers

    @classmethod
    def from_matrix(
        cls,
        points: Sequence[str],
        facilities: Sequence[str],
        matrix,
        groups: Sequence[Group],
        k: int,
        z: float,
    ) -> "Instance":
        return cls(tuple(points), tuple(facilities), np.asarray(matrix, dtype=float), tuple(groups), k, z)

    @classmethod
    def from_coords(
        cls,
        points: Sequence[str],
        facilities: Sequence[str],
        coords: Mapping[str, Sequence[float]],
        groups: Sequence[Group],
        k: int,
        z: float,
    ) -> "Instance":
        missing = [e for e in list(points) + list(facilities) if e not in coords]
        if missing:
            raise InstanceError(f"Missing coordinates for: {missing[:5]}")
        rows = np.array([coords[e] for e in list(points) + list(facilities)], dtype=float)
        if rows.ndim != 2:
            raise InstanceError("All coordinate vectors must have the same dimension")
        return cls(tuple(points), tuple(facilities), euclidean_matrix(rows), tuple(groups), k, z, coords=rows)

    def replace(self, **changes) -> "Instance":
        """Copy with some fields replaced; the metric backend is carried over."""
        values = {
            "points": self.points,
            "facilities": self.facilities,
            "matrix": self.matrix,
            "groups": self.groups,
            "k": self.k,
            "z": self.z,
            "coords": self.coords,
        }
        values.update(changes)
        return Instance(**values)

    # Sizes and lookups

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_facilities(self) -> int:
        return len(self.facilities)

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @cached_property
    def n(self) -> int:
        """``|P ∪ F|``."""
        return len(set(self.points) | set(self.facilities))

    @cached_property
    def point_index(self) -> Dict[str, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def facility_index(self) -> Dict[str, int]:
        return {f: i for i, f in enumerate(self.facilities)}

    @cached_property
    def canonical_facilities(self) -> Tuple[str, ...]:
        """Facility identifiers in canonical (sorted) order."""
        return tuple(sorted(self.facilities))

    @cached_property
    def facility_point_distances(self) -> np.ndarray:
        """``d(f, p)`` as an ``(n_F, n_P)`` array, facilities in declared order."""
        block = self.matrix[self.n_points:, : self.n_points].copy()
        block.setflags(write=False)
        return block

    @cached_property
    def memberships(self) -> "Memberships":
        return Memberships.build(self)

    @cached_property
    def cost_matrix(self) -> np.ndarray:
        """``d(f, p)^z * w_j(p)`` for every facility (declared order) and group membership."""
        m = self.memberships
        costs = power(self.facility_point_distances[:, m.point], self.z) * m.weight[None, :]
        costs.setflags(write=False)
        return costs

    def facility_rows(self, centers: CenterSet) -> np.ndarray:
        """Declared-order facility indices of ``centers``, in canonical (identifier) order."""
        if len(centers) == 0:
            raise EmptyCenterSetError()
        try:
            return np.array([self.facility_index[c] for c in centers.centers], dtype=int)
        except KeyError as e:
            raise InstanceError(f"Unknown facility in centre set: {e.args[0]!r}") from e

    def groups_disjoint(self) -> bool:
        seen = set()
        for group in self.groups:
            for member in group.members:
                if member in seen:
                    return False
                seen.add(member)
        return True

    def describe(self) -> str:
        return (
            f"|P|={self.n_points} |F|={self.n_facilities} groups={self.n_groups} "
            f"k={self.k} z={self.z:g} backend={'coords' if self.coords is not None else 'matrix'}"
        )


@dataclass(frozen=True, eq=False)
class Memberships:
    """Flattened group memberships, group-major, so that every group is a contiguous slice."""

    point: np.ndarray
    group: np.ndarray
    weight: np.ndarray
    starts: np.ndarray
    stops: np.ndarray

    @classmethod
    def build(cls, inst: Instance) -> "Memberships":
        point, group, weight, starts, stops = [], [], [], [], []
        for j, g in enumerate(inst.groups):
            starts.append(len(point))
            for member, w in zip(g.members, g.weights):
                point.append(inst.point_index[member])
                group.append(j)
                weight.append(w)
            stops.append(len(point))
        return cls(
            point=np.array(point, dtype=int),
            group=np.array(group, dtype=int),
            weight=np.array(weight, dtype=float),
            starts=np.array(starts, dtype=int),
            stops=np.array(stops, dtype=int),
        )

    def __len__(self) -> int:
        return len(self.point)


def power(distances, z: float):
    """``d ** z`` for nonnegative distances; ``0 ** z`` is ``0`` for every ``z >= 1``."""
    return np.power(np.asarray(distances, dtype=float), z)


def euclidean_matrix(rows: np.ndarray) -> np.ndarray:
    diff = rows[:, None, :] - rows[None, :, :]
    matrix = np.sqrt(np.sum(diff * diff, axis=-1))
    np.fill_diagonal(matrix, 0.0)
    return matrix
