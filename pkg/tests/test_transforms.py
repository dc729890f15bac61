import itertools

import numpy as np
import pytest

from fairclust.core.costs import fair_cost
from fairclust.core.instance import CenterSet, Group, Instance
from fairclust.core.transforms import copy_id, singleton_groups, split_overlapping_groups
from fairclust.services.generators import random_euclidean


def test_disjoint_instance_is_returned_unchanged(line):
    assert split_overlapping_groups(line) is line


def test_shared_point_is_copied_per_group(overlapping):
    split = split_overlapping_groups(overlapping)
    assert split.points == ("a", copy_id("b", 0), copy_id("b", 1), "c")
    assert split.groups_disjoint()
    assert split.groups[0].members == ("a", "b@0")
    assert split.groups[1].weight_map() == {"b@1": 0.5, "c": 1.0}
    i, j = split.point_index["b@0"], split.point_index["b@1"]
    assert split.matrix[i, j] == 0.0


def test_splitting_preserves_every_fair_cost(overlapping):
    split = split_overlapping_groups(overlapping)
    for size in (1, 2):
        for combo in itertools.combinations(overlapping.facilities, size):
            centers = CenterSet.of(combo)
            assert fair_cost(centers, split).group_costs == pytest.approx(fair_cost(centers, overlapping).group_costs)


def test_splitting_random_overlaps_preserves_costs():
    rng = np.random.default_rng(5)
    for seed in range(20):
        base = random_euclidean(8, 4, 2, 1, 2, 1 + seed % 2, rng_seed=seed)
        groups = []
        for j in range(3):
            members = sorted(str(p) for p in rng.choice(base.points, size=4, replace=False))
            groups.append(Group(f"g{j}", tuple(members), tuple(rng.uniform(0.5, 2.0, size=4))))
        inst = base.replace(groups=tuple(groups))
        split = split_overlapping_groups(inst)
        assert split.groups_disjoint()
        for combo in itertools.combinations(inst.facilities, 2):
            centers = CenterSet.of(combo)
            assert fair_cost(centers, split).value == pytest.approx(fair_cost(centers, inst).value, rel=1e-12)


def test_singleton_groups_give_the_supplier_cost():
    inst = random_euclidean(8, 5, 2, 2, 2, 2, (0.5, 3.0), rng_seed=4)
    single = singleton_groups(inst)
    assert single.n_groups == 8
    rng = np.random.default_rng(0)
    for _ in range(10):
        centers = CenterSet.of(str(f) for f in rng.choice(inst.facilities, size=2, replace=False))
        worst = 0.0
        for p in inst.points:
            i = inst.point_index[p]
            d = min(inst.matrix[i, inst.n_points + inst.facility_index[c]] for c in centers)
            worst = max(worst, d ** 2)
        assert fair_cost(centers, single).value == pytest.approx(worst)


def test_singleton_groups_is_a_fixed_point():
    matrix = np.array([[0, 1], [1, 0]], dtype=float)
    inst = Instance.from_matrix(["p"], ["f"], matrix, [Group.uniform("p", ["p"])], 1, 1)
    assert singleton_groups(inst) is inst
