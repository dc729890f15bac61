import itertools

import numpy as np
import pytest

from fairclust.core.costs import fair_cost
from fairclust.core.instance import CenterSet, Group, Instance
from fairclust.core.transforms import split_overlapping_groups
from fairclust.services.generators import random_euclidean
from fairclust.services.lp import LPError, lp_service
from fairclust.services.oracle import oracle_service
from tests.conftest import brute_force, line_instance, zero_cost_instance


def test_model_dimensions(line):
    model = lp_service.build_model(line)
    n_f, n_p = line.n_facilities, line.n_points
    assert model.n_variables == n_f + n_f * n_p + 1
    assert model.n_rows == 1 + n_p + line.n_groups + n_f * n_p
    assert model.variables[-1] == "gamma"
    assert model.eq_rows[0] == "open"
    assert "link[f2,c]" in model.ub_rows


def test_overlapping_groups_are_rejected(overlapping):
    with pytest.raises(LPError, match="overlap"):
        lp_service.build_model(overlapping)


def test_solution_is_feasible_with_small_certificate(line):
    model = lp_service.build_model(line)
    frac = lp_service.solve(model)
    assert lp_service.check_feasibility(frac, model).ok(1e-7)
    assert np.all(frac.y_values <= 1.0 + 1e-12)
    assert frac.certificate.primal_residual < 1e-8
    assert frac.certificate.dual_residual < 1e-6
    assert frac.certificate.duality_gap < 1e-6


def test_relaxation_lower_bounds_the_optimum(small_suite):
    for inst in [line_instance(), line_instance(z=2)] + small_suite:
        frac = lp_service.solve(lp_service.build_model(inst))
        opt, _ = brute_force(inst)
        assert frac.gamma <= opt * (1 + 1e-6) + 1e-9


def test_relaxation_is_exact_on_the_line(line):
    frac = lp_service.solve(lp_service.build_model(line))
    assert frac.gamma == pytest.approx(1.0)


def test_integral_point_is_feasible_with_gamma_equal_to_fair_cost(line):
    model = lp_service.build_model(line)
    for combo in itertools.combinations(line.facilities, line.k):
        centers = CenterSet.of(combo)
        point = lp_service.integral_point(line, centers)
        report = lp_service.check_feasibility(point, model)
        assert report.ok()
        assert point.gamma == fair_cost(centers, line).value


def test_check_feasibility_lists_violated_rows(line):
    model = lp_service.build_model(line)
    point = lp_service.integral_point(line, CenterSet.of(["f1", "f2"]))
    point.y_values[0] = 0.0
    report = lp_service.check_feasibility(point, model)
    assert not report.ok()
    assert "open" in report.violated_rows
    assert "link[f1,a]" in report.violated_rows


def test_split_instance_bound_matches_oracle(overlapping):
    split = split_overlapping_groups(overlapping)
    frac = lp_service.solve(lp_service.build_model(split))
    assert frac.gamma <= oracle_service.brute_force_fair(overlapping).opt_cost + 1e-9


def test_dump_lp_text_sections(line):
    text = lp_service.dump_lp_text(lp_service.build_model(line))
    lines = text.splitlines()
    assert lines[lines.index("Minimize") + 1] == " obj: gamma"
    assert "Subject To" in lines and lines[-1] == "End"
    assert any(row.startswith(" c_eq0_open: y_0 + y_1 + y_2 = 2") for row in lines)
    assert sum(1 for row in lines if row.startswith(" c_ub")) == line.n_groups + 12


def test_support_and_vector_round_out(line):
    frac = lp_service.solve(lp_service.build_model(line))
    assert len(frac.as_vector()) == 3 + 12 + 1
    assert frac.support(1e-9).issubset(CenterSet.of(line.facilities))
    assert sum(frac.y.values()) == pytest.approx(2.0)


def test_facility_on_every_point_gives_zero_gamma():
    coords = {"a": [1.0, 1.0], "b": [1.0, 1.0], "c": [1.0, 1.0], "f0": [1.0, 1.0], "f1": [5.0, 5.0]}
    groups = [Group.uniform("g0", ["a", "b"]), Group.uniform("g1", ["c"])]
    inst = Instance.from_coords(["a", "b", "c"], ["f0", "f1"], coords, groups, k=1, z=1)
    frac = lp_service.solve(lp_service.build_model(inst))
    assert frac.gamma == pytest.approx(0.0, abs=1e-9)
    assert lp_service.solve(lp_service.build_model(zero_cost_instance())).gamma == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("z", [1.0, 2.0])
def test_opening_every_facility_is_optimal(z):
    inst = random_euclidean(7, 3, 2, 2, 3, z, (0.5, 2.0), rng_seed=8)
    frac = lp_service.solve(lp_service.build_model(inst))
    assert np.allclose(frac.y_values, 1.0)
    assert frac.gamma == pytest.approx(fair_cost(CenterSet.of(inst.facilities), inst).value, rel=1e-6)
