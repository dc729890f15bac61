import numpy as np

from fairclust.core.instance import Group, Instance
from fairclust.core.metric import validate_metric
from fairclust.services.generators import random_euclidean


def _matrix_instance(matrix):
    n = len(matrix)
    points = [f"p{i}" for i in range(n - 1)]
    return Instance.from_matrix(points, ["f"], np.array(matrix, dtype=float), [Group.uniform("g", points)], 1, 1)


def test_euclidean_instance_is_a_metric():
    for seed in range(5):
        report = validate_metric(random_euclidean(12, 6, 3, 2, 2, 2, rng_seed=seed))
        assert report.ok
        assert report.exhaustive
        assert report.triples_checked == 18 ** 3
        assert report.fact1_checked > 0


def test_broken_triangle_is_reported():
    report = validate_metric(_matrix_instance([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    assert report.triangle_violations == 2
    assert not report.ok
    assert any(e[0] == "triangle" for e in report.examples)


def test_asymmetry_negative_and_diagonal_are_reported():
    report = validate_metric(_matrix_instance([[0.5, 1, 1], [2, 0, 1], [1, 1, 0]]))
    assert report.symmetry_violations == 1
    assert report.diagonal_violations == 1

    report = validate_metric(_matrix_instance([[0, -1, 1], [-1, 0, 1], [1, 1, 0]]))
    assert report.negative_entries == 2


def test_sampled_mode_above_the_exhaustive_limit():
    inst = random_euclidean(20, 5, 2, 1, 1, 1, rng_seed=3)
    report = validate_metric(inst, exhaustive_limit=10, fact1_samples=100, seed=1)
    assert not report.exhaustive
    assert report.triples_checked == 10 * 25 ** 2
    assert report.ok


def test_relaxed_triangle_holds_for_squared_distances():
    inst = random_euclidean(15, 5, 2, 1, 1, 2, rng_seed=11)
    report = validate_metric(inst, fact1_samples=5000)
    assert report.fact1_checked == 5000
    assert report.fact1_violations == 0
