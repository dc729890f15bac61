import itertools

import pytest

from fairclust.core.costs import unconstrained_cost
from fairclust.core.instance import CenterSet
from fairclust.services.enumeration import EnumerationCapError
from fairclust.services.oracle import oracle_service
from tests.conftest import brute_force


def test_line_optimum(line):
    result = oracle_service.brute_force_fair(line)
    assert result.opt_cost == pytest.approx(1.0)
    assert result.opt_set.centers == ("f1", "f2")
    assert result.enumerated == 3


def test_oracle_agrees_with_plain_enumeration(small_suite):
    for inst in small_suite:
        result = oracle_service.brute_force_fair(inst, workers=2)
        value, centers = brute_force(inst)
        assert result.opt_cost == value
        assert result.opt_set == centers


def test_unconstrained_optimum(small_suite):
    for inst in small_suite:
        result = oracle_service.brute_force_unconstrained(inst)
        best = min(
            unconstrained_cost(CenterSet.of(c), inst) for c in itertools.combinations(inst.facilities, inst.k)
        )
        assert result.opt_cost == pytest.approx(best, rel=1e-12)


def test_unconstrained_optimum_within_l_times_fair_optimum(small_suite):
    for inst in small_suite:
        fair = oracle_service.brute_force_fair(inst).opt_cost
        total = oracle_service.brute_force_unconstrained(inst).opt_cost
        assert total <= inst.n_groups * fair * (1 + 1e-9)


def test_cap_is_enforced(line):
    with pytest.raises(EnumerationCapError):
        oracle_service.brute_force_fair(line, cap=2)


def test_zero_cost_instance(zero_cost):
    for result in (oracle_service.brute_force_unconstrained(zero_cost), oracle_service.brute_force_fair(zero_cost)):
        assert result.opt_cost == 0.0
        assert result.opt_set.centers == ("fa", "fb", "fc", "fd")
