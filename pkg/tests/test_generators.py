import numpy as np
import pytest

from fairclust.core.metric import validate_metric
from fairclust.core.transforms import singleton_groups
from fairclust.services.enumeration import EnumerationCapError
from fairclust.services.generators import (
    GeneratorError,
    SetCoverageInstance,
    exhaustive_cover_check,
    planted_set_coverage,
    random_euclidean,
    random_set_coverage,
    reduce_set_coverage,
)
from fairclust.services.oracle import oracle_service


def test_random_euclidean_is_deterministic():
    a = random_euclidean(10, 6, 3, 3, 2, 1, (0.5, 2.0), rng_seed=42)
    b = random_euclidean(10, 6, 3, 3, 2, 1, (0.5, 2.0), rng_seed=42)
    assert a.points == b.points
    assert np.array_equal(a.matrix, b.matrix)
    assert a.groups == b.groups


def test_random_euclidean_ids_and_partition():
    inst = random_euclidean(12, 4, 2, 3, 2, 2, rng_seed=1)
    assert inst.points[0] == "p00" and inst.facilities[-1] == "f3"
    assert inst.groups_disjoint()
    assert sorted(m for g in inst.groups for m in g.members) == sorted(inst.points)
    assert np.all((inst.coords >= 0) & (inst.coords <= 1))


def test_one_group_per_point_forces_singletons():
    inst = random_euclidean(7, 3, 2, 7, 1, 1, rng_seed=5)
    assert all(len(g.members) == 1 for g in inst.groups)


@pytest.mark.parametrize(
    "args",
    [(3, 3, 2, 4, 1, 1), (3, 3, 2, 1, 4, 1), (0, 3, 2, 1, 1, 1)],
)
def test_random_euclidean_rejects_impossible_requests(args):
    with pytest.raises(GeneratorError):
        random_euclidean(*args)


def test_random_euclidean_passes_metric_validation():
    assert validate_metric(random_euclidean(15, 8, 4, 3, 3, 2, rng_seed=8)).ok


def test_reduction_distances(yes_cover):
    inst = reduce_set_coverage(yes_cover, z=1)
    n_p = inst.n_points
    assert inst.facilities == ("c0", "c1", "c2")
    assert inst.matrix[inst.point_index["x_u0"], n_p + 0] == 1.0
    assert inst.matrix[inst.point_index["x_u0"], n_p + 1] == 3.0
    assert inst.matrix[0, 1] == 2.0 and inst.matrix[n_p, n_p + 1] == 2.0
    assert np.all(np.diag(inst.matrix) == 0)
    assert validate_metric(inst).ok
    assert singleton_groups(inst) is inst


@pytest.mark.parametrize("z", [1, 2])
def test_reduction_gap(yes_cover, no_cover, z):
    assert oracle_service.brute_force_fair(reduce_set_coverage(yes_cover, z)).opt_cost == 1.0
    assert oracle_service.brute_force_fair(reduce_set_coverage(no_cover, z)).opt_cost == 3.0 ** z


def test_reduction_rejects_large_k(yes_cover):
    with pytest.raises(GeneratorError):
        reduce_set_coverage(SetCoverageInstance(yes_cover.universe, yes_cover.collection, 4), 1)


def test_cover_check_trivial_cases():
    universe = ("a", "b")
    assert exhaustive_cover_check(SetCoverageInstance(universe, (frozenset(universe), frozenset()), 1))
    assert not exhaustive_cover_check(SetCoverageInstance(universe, (frozenset(), frozenset()), 2))


def test_cover_check_cap():
    sc = random_set_coverage(5, 20, 5, rng_seed=0)
    with pytest.raises(EnumerationCapError):
        exhaustive_cover_check(sc, cap=100)


def test_planted_yes_and_no(yes_cover, no_cover):
    assert exhaustive_cover_check(yes_cover)
    assert not exhaustive_cover_check(no_cover)
    for seed in range(10):
        yes = planted_set_coverage(8, 6, 3, rng_seed=seed)
        no = planted_set_coverage(8, 6, 3, rng_seed=seed, yes=False)
        assert yes.is_yes and exhaustive_cover_check(yes)
        assert no.is_yes is False and not exhaustive_cover_check(no)
        assert len(yes.collection) == 6


def test_planted_rejects_impossible_requests():
    with pytest.raises(GeneratorError):
        planted_set_coverage(2, 5, 3)
    with pytest.raises(GeneratorError):
        planted_set_coverage(5, 2, 3)


def test_set_coverage_validation():
    with pytest.raises(GeneratorError):
        SetCoverageInstance(("a",), (frozenset({"b"}),), 1)
    with pytest.raises(GeneratorError):
        SetCoverageInstance(("a",), (frozenset({"a"}),), 0)
