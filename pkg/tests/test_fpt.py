import itertools

import pytest

from fairclust.core.costs import fair_cost
from fairclust.core.instance import CenterSet
from fairclust.services.enumeration import EnumerationCapError
from fairclust.services.fpt import FPTError, fpt_service, internal_epsilon
from fairclust.services.generators import random_euclidean
from fairclust.services.oracle import oracle_service
from tests.conftest import brute_force


def test_internal_epsilon():
    assert internal_epsilon(0.5, 1) == 0.5
    assert internal_epsilon(0.9, 2) == pytest.approx(0.3)


def test_subset_search_finds_the_best_subset(small_suite):
    for inst in small_suite:
        big = CenterSet.of(inst.facilities)
        centers, value = fpt_service.subset_search(inst, big, cap=10**6)
        assert value == brute_force(inst)[0]
        assert len(centers) == inst.k


def test_subset_search_errors(line):
    with pytest.raises(FPTError):
        fpt_service.subset_search(line, CenterSet.of(["f1"]))
    with pytest.raises(EnumerationCapError):
        fpt_service.subset_search(line, CenterSet.of(line.facilities), cap=1)


def test_projection_bound(small_suite):
    """The nearest-member projection of an optimum is a 3^(z-1)(alpha+2)-approximation."""
    for inst in small_suite:
        oracle = oracle_service.brute_force_fair(inst)
        for size in range(inst.k, inst.n_facilities + 1):
            for combo in itertools.combinations(inst.facilities, size):
                big = CenterSet.of(combo)
                alpha = fair_cost(big, inst).value / oracle.opt_cost
                bound = 3 ** (inst.z - 1) * (alpha + 2) * oracle.opt_cost
                projected = fpt_service.project_onto(inst, big, oracle.opt_set)
                assert projected.issubset(big)
                assert fair_cost(projected, inst).value <= bound * (1 + 1e-6)
                _, searched = fpt_service.subset_search(inst, big)
                assert searched <= fair_cost(projected, inst).value + 1e-12


def test_bicriteria_reports_blow_up(line):
    result = fpt_service.bicriteria(line, 0.5, rng_seed=0)
    assert result.beta == len(result.centers) / line.k
    assert result.gamma_star == pytest.approx(1.0)
    assert result.cost.value <= 1.5 * 1.0 + 1e-9
    assert set(result.wall_times) == {"lp", "rounding"}


def test_solve_line(line):
    report = fpt_service.solve(line, 0.5, rng_seed=0)
    assert report.solution.centers == ("f1", "f2")
    assert report.fair_cost == pytest.approx(1.0)
    assert report.oracle_opt == pytest.approx(1.0)
    assert report.epsilon_internal == 0.5
    assert report.subsets_enumerated >= 1
    assert set(report.wall_times) >= {"lp", "rounding", "subset_search", "oracle"}


def test_solve_skips_oracle_above_cap(line):
    report = fpt_service.solve(line, 0.5, rng_seed=0, oracle_cap=2)
    assert report.oracle_opt is None
    assert "oracle" not in report.wall_times


def test_solve_handles_overlapping_groups(overlapping):
    report = fpt_service.solve(overlapping, 1.0, rng_seed=4)
    assert report.fair_cost <= (3.0 + 1.0) * report.oracle_opt + 1e-9
    assert len(report.per_group_costs) == 2


def test_solve_is_deterministic_across_workers():
    inst = random_euclidean(9, 6, 2, 3, 3, 2, (0.5, 2.0), rng_seed=17)
    one = fpt_service.solve(inst, 0.5, rng_seed=8, workers=1)
    four = fpt_service.solve(inst, 0.5, rng_seed=8, workers=4)
    assert one.solution == four.solution
    assert one.fair_cost == four.fair_cost
    assert one.bicriteria_set_size == four.bicriteria_set_size


def test_solve_rejects_bad_epsilon(line):
    for eps in (0.0, -0.1, 1.01):
        with pytest.raises(FPTError):
            fpt_service.solve(line, eps)


def test_solve_zero_cost_instance(zero_cost):
    report = fpt_service.solve(zero_cost, 0.5, rng_seed=2)
    assert report.fair_cost == 0.0
    assert report.solution.centers == ("fa", "fb", "fc", "fd")
    assert report.oracle_opt == 0.0
