import numpy as np
import pytest

from tiletopo.errors import DimensionError, InvalidParameterError
from tiletopo.prism import base_prism, compose_h, profile_from_pair
from tiletopo.tile import SelfAffinePair, level_points
from tiletopo.verify import (
    DigitCloud,
    check_convergence,
    check_height_properties,
    check_injectivity,
    hausdorff,
    hausdorff_bruteforce,
)


def test_hausdorff_trivial_cases():
    a = np.random.default_rng(0).normal(size=(50, 3))
    assert hausdorff(a, a) == 0
    assert hausdorff([[0, 0]], [[0.3, -0.7]]) == 0.7


def test_hausdorff_shifted_cloud_matches_bruteforce():
    a = np.random.default_rng(1).uniform(size=(100, 2))
    b = a + [0.25, 0]
    assert hausdorff(a, b) == hausdorff_bruteforce(a, b)


def test_hausdorff_errors():
    with pytest.raises(InvalidParameterError):
        hausdorff(np.zeros((0, 2)), [[0, 0]])
    with pytest.raises(DimensionError):
        hausdorff([[0, 0]], [[0, 0, 0]])


def test_hausdorff_pseudometric():
    rng = np.random.default_rng(2)
    for _ in range(100):
        a, b, c = (rng.normal(size=(rng.integers(1, 40), 2)) for _ in range(3))
        assert hausdorff(a, b) == hausdorff(b, a)
        assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12


@pytest.mark.parametrize("p,s,level", [((3, 3), (2,), 5), ((2, -3, 2), ("1/2", 1), 4)])
def test_grouped_cloud_distance_matches_full_cloud(p, s, level):
    pair = SelfAffinePair.standard(p, s)
    rng = np.random.default_rng(5)
    lo, hi = pair.bounding_box
    samples = rng.uniform(lo - 0.2, hi + 0.2, size=(3000, pair.d))
    full = level_points(pair, level)
    got = DigitCloud(pair, level).hausdorff(samples)
    assert got == pytest.approx(hausdorff(samples, full), abs=1e-12)


def test_injectivity_identity_map():
    pair = SelfAffinePair.standard((3, 3), (1,))
    base = base_prism(pair)
    h = compose_h(base, pair, profile_from_pair(pair), 0)
    rep = check_injectivity(h, base, 2000, 1e-3, seed=0)
    assert rep.passed
    assert rep.stats["min_image_separation"] >= 1e-3


def test_injectivity_degenerate_bound():
    pair = SelfAffinePair.standard((3, 3), (0,))
    base = base_prism(pair)
    h = compose_h(base, pair, profile_from_pair(pair), 1)
    rep = check_injectivity(h, base, 5000, 1e-3, seed=1)
    assert rep.passed
    assert rep.stats["min_image_separation"] >= 1e-3 / 3 - 1e-12


def test_height_properties_degenerate():
    pair = SelfAffinePair.standard((2, 2), (0,))
    base = base_prism(pair)
    h = compose_h(base, pair, profile_from_pair(pair), 4)
    rep = check_height_properties(h, base, 300, seed=0)
    assert rep.passed
    assert rep.stats["max_stabilization_index"] == 1


def test_height_properties_needs_depth_two():
    pair = SelfAffinePair.standard((2, 2), (0,))
    base = base_prism(pair)
    with pytest.raises(InvalidParameterError):
        check_height_properties(compose_h(base, pair, profile_from_pair(pair), 1), base, 10)


def test_convergence_unit_square_depth_zero():
    pair = SelfAffinePair.standard((2, 2), (0,))
    base = base_prism(pair)
    grid = 41
    rep = check_convergence(pair, base, profile_from_pair(pair), 0, 8, grid, tolerance=1.0)
    assert rep.stats["hausdorff"] <= 2 ** -8 + 1 / (grid - 1)


def test_convergence_dimension_mismatch():
    pair = SelfAffinePair.standard((2, 2), (0,))
    other = SelfAffinePair.standard((2, 2, 2), (0, 0))
    with pytest.raises(DimensionError):
        check_convergence(pair, base_prism(pair), profile_from_pair(other), 0, 4)


def test_reports_are_reproducible():
    pair = SelfAffinePair.standard((2, 2), (1,))
    base = base_prism(pair)
    h = compose_h(base, pair, profile_from_pair(pair), 3)
    a = check_injectivity(h, base, 3000, 1e-3, seed=9).to_kv()
    b = check_injectivity(h, base, 3000, 1e-3, seed=9).to_kv()
    assert a == b
    assert "check=injectivity\npassed=true\nseed=9\n" in a
