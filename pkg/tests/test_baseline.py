import pytest

from fairclust.core.costs import fair_cost, unconstrained_cost
from fairclust.services.baseline import (
    BaselineConfig,
    BaselineError,
    BaselineService,
    approximation_constant,
    baseline_service,
)
from fairclust.services.oracle import oracle_service


@pytest.mark.parametrize("z, expected", [(1, 5.0), (2, 25.0), (3, 135.0), (1.5, 5.0 * 3 ** 1.5)])
def test_approximation_constant(z, expected):
    assert approximation_constant(z) == pytest.approx(expected)


def test_config_validation():
    with pytest.raises(BaselineError):
        BaselineConfig(max_swap_rounds=0, improvement_threshold=0.1)
    with pytest.raises(BaselineError):
        BaselineConfig(max_swap_rounds=5, improvement_threshold=1.0)


def test_local_search_reaches_a_local_optimum(small_suite):
    for inst in small_suite:
        centers = baseline_service.unconstrained_local_search(inst)
        assert len(centers) == inst.k
        assert baseline_service.is_locally_optimal(inst, centers)


def test_local_search_finds_the_line_optimum(line):
    centers = baseline_service.unconstrained_local_search(line)
    assert centers.centers == ("f1", "f2")
    assert unconstrained_cost(centers, line) == pytest.approx(2.0)


def test_local_search_rejects_bad_k(line):
    with pytest.raises(BaselineError):
        baseline_service.unconstrained_local_search(line, k=4)


def test_local_search_is_deterministic(small_suite):
    service = BaselineService(BaselineConfig(max_swap_rounds=50, improvement_threshold=1e-3))
    for inst in small_suite:
        assert service.ell_approx(inst) == service.ell_approx(inst)


def test_ell_approx_within_declared_bound(small_suite, line):
    for inst in small_suite + [line]:
        opt = oracle_service.brute_force_fair(inst).opt_cost
        value = fair_cost(baseline_service.ell_approx(inst), inst).value
        assert value <= baseline_service.ell_bound(inst) * opt * (1 + 1e-9) + 1e-12


def test_local_search_finds_a_zero_cost_solution(zero_cost):
    centers = baseline_service.unconstrained_local_search(zero_cost)
    assert centers.centers == ("fa", "fb", "fc", "fd")
    assert unconstrained_cost(centers, zero_cost) == 0.0


def test_local_search_with_k_equal_to_all_facilities(line):
    assert baseline_service.unconstrained_local_search(line, k=3).centers == line.facilities
