from fairclust.core.costs import (
    FairCost,
    cluster_cost,
    fair_cost,
    group_costs,
    unconstrained_cost,
    voronoi_partition,
)
from fairclust.core.instance import (
    AssignedPoint,
    Assignment,
    CenterSet,
    EmptyCenterSetError,
    Group,
    Instance,
    InstanceError,
)
from fairclust.core.metric import MetricReport, validate_metric
from fairclust.core.transforms import singleton_groups, split_overlapping_groups

__all__ = [
    "AssignedPoint",
    "Assignment",
    "CenterSet",
    "EmptyCenterSetError",
    "FairCost",
    "Group",
    "Instance",
    "InstanceError",
    "MetricReport",
    "cluster_cost",
    "fair_cost",
    "group_costs",
    "singleton_groups",
    "split_overlapping_groups",
    "unconstrained_cost",
    "validate_metric",
    "voronoi_partition",
]
