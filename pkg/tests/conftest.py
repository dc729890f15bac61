import itertools

import numpy as np
import pytest

from fairclust.core.costs import fair_cost
from fairclust.core.instance import CenterSet, Group, Instance
from fairclust.services.generators import SetCoverageInstance, random_euclidean


def line_instance(z: float = 1.0) -> Instance:
    """Four points on a line, two groups interleaved; OPT is 1 (z=1) with centres f1, f2."""
    coords = {
        "a": [0.0], "b": [1.0], "c": [10.0], "d": [11.0],
        "f1": [0.5], "f2": [10.5], "f3": [5.0],
    }
    groups = [Group.uniform("g0", ["a", "c"]), Group.uniform("g1", ["b", "d"])]
    return Instance.from_coords(["a", "b", "c", "d"], ["f1", "f2", "f3"], coords, groups, k=2, z=z)


def zero_cost_instance(spare: bool = False, z: float = 1.0) -> Instance:
    """A facility on every point and k = 4; ``spare`` adds a far facility ``fz``."""
    locations = {"a": [0.0, 0.0], "b": [3.0, 0.0], "c": [0.0, 4.0], "d": [3.0, 4.0]}
    coords = dict(locations)
    coords.update({f"f{p}": xy for p, xy in locations.items()})
    facilities = [f"f{p}" for p in locations]
    if spare:
        coords["fz"] = [10.0, 10.0]
        facilities.append("fz")
    groups = [Group.uniform("g0", ["a", "b"]), Group("g1", ("c", "d"), (2.0, 0.5))]
    return Instance.from_coords(list(locations), facilities, coords, groups, k=4, z=z)


def brute_force(inst: Instance):
    """Independent exhaustive optimum: plain itertools, no shared enumeration code."""
    best = None
    for combo in itertools.combinations(sorted(inst.facilities), inst.k):
        value = fair_cost(CenterSet.of(combo), inst).value
        if best is None or value < best[0]:
            best = (value, CenterSet.of(combo))
    return best


@pytest.fixture
def line():
    return line_instance()


@pytest.fixture
def zero_cost():
    return zero_cost_instance(spare=True)


@pytest.fixture
def overlapping():
    """Point ``b`` belongs to both groups with different weights."""
    matrix = np.array(
        [
            [0, 2, 4, 1, 5],
            [2, 0, 2, 3, 3],
            [4, 2, 0, 5, 1],
            [1, 3, 5, 0, 6],
            [5, 3, 1, 6, 0],
        ],
        dtype=float,
    )
    groups = [Group("left", ("a", "b"), (1.0, 2.0)), Group("right", ("b", "c"), (0.5, 1.0))]
    return Instance.from_matrix(["a", "b", "c"], ["f", "g"], matrix, groups, k=1, z=1)


@pytest.fixture
def small_suite():
    """Seeded desk-scale instances: n_P <= 10, n_F <= 6, k <= 3, l <= 3."""
    out = []
    for seed in range(6):
        out.append(
            random_euclidean(
                n_points=6 + seed % 5,
                n_facilities=4 + seed % 3,
                dim=2,
                n_groups=1 + seed % 3,
                k=1 + seed % 3,
                z=1.0 + seed % 2,
                weight_range=(0.5, 2.0),
                rng_seed=100 + seed,
            )
        )
    return out


@pytest.fixture
def yes_cover():
    return SetCoverageInstance(
        ("u0", "u1", "u2", "u3"),
        (frozenset({"u0", "u1"}), frozenset({"u2", "u3"}), frozenset({"u1", "u2"})),
        k=2,
        is_yes=True,
    )


@pytest.fixture
def no_cover():
    return SetCoverageInstance(
        ("u0", "u1", "u2", "u3"),
        (frozenset({"u0", "u1"}), frozenset({"u2"}), frozenset({"u1", "u3"})),
        k=2,
        is_yes=False,
    )
