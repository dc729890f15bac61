import itertools

import numpy as np
import pytest

from fairclust.core.costs import (
    cluster_cost,
    fair_cost,
    group_costs,
    unconstrained_cost,
    voronoi_partition,
)
from fairclust.core.instance import CenterSet, EmptyCenterSetError, Group, Instance
from fairclust.services.generators import random_euclidean
from tests.conftest import line_instance


def test_cluster_cost_by_hand(line):
    group = line.groups[0]
    assert cluster_cost(CenterSet.of(["f1"]), group, line) == pytest.approx(0.5 + 9.5)
    assert cluster_cost(CenterSet.of(["f1"]), group, line, z=2) == pytest.approx(0.25 + 90.25)


def test_cluster_cost_of_empty_set_fails(line):
    with pytest.raises(EmptyCenterSetError):
        cluster_cost(CenterSet(()), line.groups[0], line)


def test_fair_cost_takes_worst_group(line):
    cost = fair_cost(CenterSet.of(["f1", "f3"]), line)
    assert cost.group_costs == pytest.approx((0.5 + 5.0, 0.5 + 6.0))
    assert cost.value == pytest.approx(6.5)
    assert cost.argmax_group == 1


def test_fair_cost_tie_goes_to_first_group(line):
    cost = fair_cost(CenterSet.of(["f1", "f2"]), line)
    assert cost.value == pytest.approx(1.0)
    assert cost.argmax_group == 0


def test_fair_cost_is_monotone_under_supersets():
    rng = np.random.default_rng(7)
    for seed in range(30):
        inst = random_euclidean(8, 6, 2, 3, 2, 1 + seed % 2, (0.5, 2.0), rng_seed=seed)
        order = [str(f) for f in rng.permutation(inst.facilities)]
        small = CenterSet.of(order[:2])
        big = CenterSet.of(order[:4])
        assert fair_cost(big, inst).value <= fair_cost(small, inst).value + 1e-12


def test_scaling_weights_scales_costs_and_keeps_argmax(line):
    centers = CenterSet.of(["f1", "f3"])
    base = fair_cost(centers, line)
    scaled = line.replace(groups=tuple(Group(g.name, g.members, tuple(3.0 * w for w in g.weights)) for g in line.groups))
    result = fair_cost(centers, scaled)
    assert result.value == pytest.approx(3.0 * base.value)
    assert result.argmax_group == base.argmax_group


@pytest.mark.parametrize("z", [1.0, 2.0, 1.5])
def test_scaling_distances_scales_by_power(z):
    inst = line_instance(z=z)
    centers = CenterSet.of(["f2", "f3"])
    base = fair_cost(centers, inst)
    scaled = fair_cost(centers, inst.replace(matrix=inst.matrix * 2.0, coords=None))
    assert scaled.value == pytest.approx(2.0 ** z * base.value)
    assert scaled.argmax_group == base.argmax_group


def test_unconstrained_cost_sums_groups(line):
    centers = CenterSet.of(["f1", "f3"])
    assert unconstrained_cost(centers, line) == pytest.approx(sum(group_costs(centers, line)))


def test_voronoi_matches_explicit_nearest_search():
    for seed in range(20):
        inst = random_euclidean(9, 5, 2, 2, 3, 1, rng_seed=seed)
        centers = CenterSet.of(inst.facilities[:3])
        assignment = voronoi_partition(centers, inst)
        for p in inst.points:
            i = inst.point_index[p]
            best = min(centers, key=lambda c: (inst.matrix[i, inst.n_points + inst.facility_index[c]], c))
            assert assignment.center_of(p) == best


def test_voronoi_breaks_ties_by_identifier():
    matrix = np.array([[0, 1, 1], [1, 0, 2], [1, 2, 0]], dtype=float)
    inst = Instance.from_matrix(["p"], ["zeta", "alpha"], matrix, [Group.uniform("g", ["p"])], 2, 1)
    assert voronoi_partition(CenterSet.of(["zeta", "alpha"]), inst).center_of("p") == "alpha"


def test_voronoi_costs_use_total_weight(overlapping):
    assignment = voronoi_partition(CenterSet.of(["g"]), overlapping)
    # b sits at distance 3 from g and carries weight 2 + 0.5
    assert assignment.points["b"].cost == pytest.approx(3.0 * 2.5)
    assert assignment.group_costs == pytest.approx((5.0 + 6.0, 1.5 + 1.0))


def test_group_costs_agree_with_cluster_cost():
    for seed in range(10):
        inst = random_euclidean(7, 4, 3, 3, 2, 2, (0.1, 5.0), rng_seed=seed)
        for combo in itertools.combinations(inst.facilities, 2):
            centers = CenterSet.of(combo)
            assert group_costs(centers, inst) == tuple(cluster_cost(centers, g, inst) for g in inst.groups)
