import logging
from collections import Counter
from typing import Dict, List

import numpy as np

from fairclust.core.instance import Group, Instance

logger = logging.getLogger(__name__)


def copy_id(point: str, group_index: int) -> str:
    return f"{point}@{group_index}"


def split_overlapping_groups(inst: Instance) -> Instance:
    """
    Make the groups pairwise disjoint.

    A point that belongs to ``t > 1`` groups is replaced by ``t`` copies, one per group, each
    at distance zero from the original (and so at the original's distance from everything
    else) and carrying that group's weight. Points in a single group keep their identifier.
    The fair cost of every centre set is unchanged.
    """
    counts = Counter(m for g in inst.groups for m in g.members)
    shared = {p for p, c in counts.items() if c > 1}
    if not shared:
        return inst

    # Declared order of the new point list: original order, each shared point expanded
    # into its copies in group order.
    copies: Dict[str, List[str]] = {p: [] for p in shared}
    new_groups = []
    for j, group in enumerate(inst.groups):
        members = []
        for member in group.members:
            if member in shared:
                clone = copy_id(member, j)
                copies[member].append(clone)
                members.append(clone)
            else:
                members.append(member)
        new_groups.append(Group(group.name, tuple(members), group.weights))

    new_points: List[str] = []
    source: List[int] = []
    for i, p in enumerate(inst.points):
        for clone in copies.get(p, [p]):
            new_points.append(clone)
            source.append(i)
    source += [inst.n_points + f for f in range(inst.n_facilities)]
    source_idx = np.array(source, dtype=int)

    matrix = inst.matrix[np.ix_(source_idx, source_idx)]
    coords = inst.coords[source_idx] if inst.coords is not None else None

    logger.info(f"Split {len(shared)} shared points into {sum(len(c) for c in copies.values())} copies")
    return Instance(
        points=tuple(new_points),
        facilities=inst.facilities,
        matrix=matrix,
        groups=tuple(new_groups),
        k=inst.k,
        z=inst.z,
        coords=coords,
    )


def singleton_groups(inst: Instance) -> Instance:
    """
    Replace the groups by one unit-weight group per point, in declared point order.

    The fair cost of every centre set then equals the k-supplier cost ``max_x d(C, x)^z``.
    """
    if inst.n_groups == inst.n_points and all(
        g.members == (p,) and g.weights == (1.0,) for g, p in zip(inst.groups, inst.points)
    ):
        return inst
    return inst.replace(groups=tuple(Group.uniform(p, (p,)) for p in inst.points))
