import logging
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from fairclust.core.instance import (
    AssignedPoint,
    Assignment,
    CenterSet,
    EmptyCenterSetError,
    Group,
    Instance,
    InstanceError,
    power,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FairCost:
    """The fair cost ``max_j cost(C, P_j)`` with the vector it was taken over."""

    value: float
    group_costs: Tuple[float, ...]
    argmax_group: int

    def __float__(self) -> float:
        return self.value


def sum_costs(costs: np.ndarray) -> float:
    """The single summation path shared by every per-group cost."""
    return float(np.add.reduce(np.ascontiguousarray(costs, dtype=float)))


def nearest_centers(inst: Instance, centers: CenterSet) -> Tuple[np.ndarray, np.ndarray]:
    """
    Distance from every point to its nearest centre, and that centre's facility index.

    Rows are scanned in identifier order, so equidistant centres resolve to the smallest identifier.
    """
    rows = inst.facility_rows(centers)
    block = inst.facility_point_distances[rows]
    best = np.argmin(block, axis=0)
    return block[best, np.arange(inst.n_points)], rows[best]


def cluster_cost(centers: CenterSet, group: Group, inst: Instance, z: Optional[float] = None) -> float:
    """
    Unconstrained clustering cost ``Σ_{p∈S} d(C, p)^z · w(p)`` of a weighted point set.

    Args:
        centers: Non-empty centre set drawn from ``inst.facilities``
        group: The weighted point set ``S``; every member must be a point of ``inst``
        inst: Instance providing the metric
        z: Exponent override; defaults to ``inst.z``

    Returns:
        float: The weighted cost

    Raises:
        EmptyCenterSetError: If ``centers`` is empty
        InstanceError: If ``S`` mentions an unknown point
    """
    if len(centers) == 0:
        raise EmptyCenterSetError()
    exponent = inst.z if z is None else float(z)
    distances, _ = nearest_centers(inst, centers)
    try:
        idx = np.array([inst.point_index[p] for p in group.members], dtype=int)
    except KeyError as e:
        raise InstanceError(f"Point {e.args[0]!r} is not part of the instance") from e
    costs = power(distances[idx], exponent) * np.array(group.weights, dtype=float)
    return sum_costs(costs)


def membership_costs(centers: CenterSet, inst: Instance) -> np.ndarray:
    """``d(C, p)^z · w_j(p)`` for every group membership, group-major."""
    distances, _ = nearest_centers(inst, centers)
    m = inst.memberships
    return power(distances[m.point], inst.z) * m.weight


def group_costs(centers: CenterSet, inst: Instance) -> Tuple[float, ...]:
    costs = membership_costs(centers, inst)
    m = inst.memberships
    return tuple(sum_costs(costs[start:stop]) for start, stop in zip(m.starts, m.stops))


def fair_cost(centers: CenterSet, inst: Instance) -> FairCost:
    """
    Fair cost ``Φ(C, P) = max_j cost(C, P_j)``.

    Ties for the argmax group go to the lowest group index.
    """
    per_group = group_costs(centers, inst)
    argmax = int(np.argmax(np.array(per_group)))
    return FairCost(value=per_group[argmax], group_costs=per_group, argmax_group=argmax)


def unconstrained_cost(centers: CenterSet, inst: Instance) -> float:
    """``Σ_j cost(C, P_j)``, the objective of the unconstrained problem."""
    return float(sum(group_costs(centers, inst)))


def voronoi_partition(centers: CenterSet, inst: Instance) -> Assignment:
    """Assign every point to its nearest centre (lowest identifier on ties)."""
    distances, rows = nearest_centers(inst, centers)
    total_weight = np.zeros(inst.n_points)
    m = inst.memberships
    np.add.at(total_weight, m.point, m.weight)
    point_costs = power(distances, inst.z) * total_weight

    entries: Dict[str, AssignedPoint] = {}
    for i, p in enumerate(inst.points):
        entries[p] = AssignedPoint(
            center=inst.facilities[rows[i]],
            distance=float(distances[i]),
            cost=float(point_costs[i]),
        )
    return Assignment(points=entries, group_costs=group_costs(centers, inst))
