from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tiletopo.errors import InvalidParameterError, InvalidWordError, ResourceError, UnsupportedConfigurationError
from tiletopo.tile import (
    SelfAffinePair,
    approximate,
    cell_graph_connected,
    cloud_from_csv,
    cloud_to_csv,
    digit_expansion_point,
    estimate_measure,
    level_points,
    tiling_overlap_check,
)
from tiletopo.verify import hausdorff


def pair33():
    return SelfAffinePair.standard((3, 3), (2,))


def test_zero_digit_word_gives_origin():
    pair = pair33()
    zero = pair.digits.index((0, 0))
    assert digit_expansion_point(pair, (zero,) * 5) == (0, 0)


def test_single_digit_back_substitution():
    pair = pair33()
    i = pair.digits.index((1, 1))
    assert digit_expansion_point(pair, (i,)) == (Fraction(5, 9), Fraction(1, 3))


def test_two_digit_word_matches_float_backend():
    pair = pair33()
    i = pair.digits.index((1, 1))
    exact = digit_expansion_point(pair, (i, i))
    first = pair.solve_exact((1, 1))
    second = pair.solve_exact(first)
    assert exact == tuple(a + b for a, b in zip(first, second))
    approx = digit_expansion_point(pair, (i, i), exact_mode=False)
    assert np.abs(approx - np.array(exact, dtype=float)).max() < 1e-12


def test_out_of_range_digit_index():
    with pytest.raises(InvalidWordError):
        digit_expansion_point(pair33(), (9,))


def test_level_zero_and_one():
    pair = pair33()
    a0 = approximate(pair, 0)
    assert a0.points.tolist() == [[0.0, 0.0]]
    assert a0.cell_radius == pytest.approx(pair.radius_bound)
    a1 = approximate(pair, 1, exact_mode=True)
    assert len(a1) == 9
    assert set(a1.exact_points) == {pair.solve_exact(d) for d in pair.digits}


def test_unit_square_cloud_bounding_box():
    pts = approximate(SelfAffinePair.standard((2, 2), (0,)), 8).points
    assert pts.min() == 0
    assert 1 - 2 ** -8 <= pts.max() < 1


def test_budget_guard():
    with pytest.raises(ResourceError):
        approximate(pair33(), 9, budget=1000)


def test_cell_radius_decreases():
    pair = SelfAffinePair.standard((3, 3, 3), (2, "9/5"))
    radii = [pair.cell_radius(n) for n in range(6)]
    assert all(b < a for a, b in zip(radii, radii[1:]))


def test_measure_unit_square():
    m = estimate_measure(SelfAffinePair.standard((2, 2), (0,)), 8, 100_000, seed=1)
    assert 0.95 <= m <= 1.05


def test_measure_needs_samples_and_integer_digits():
    with pytest.raises(InvalidParameterError):
        estimate_measure(pair33(), 5, 0, seed=0)
    with pytest.raises(UnsupportedConfigurationError):
        estimate_measure(SelfAffinePair.standard((3, 3), (2,), offsets=(("1/2",), (0,), (0,))), 5, 10, seed=0)


def test_measure_is_seed_deterministic():
    pair = pair33()
    assert estimate_measure(pair, 5, 5000, 7) == estimate_measure(pair, 5, 5000, 7)


def test_overlap_far_box_has_no_coverage():
    pair = SelfAffinePair.standard((2, 2), (0,))
    rep = tiling_overlap_check(pair, [(0, 0)], 6, 2000, 0, box=((10, 10), (11, 11)))
    assert rep.coverage == 0


def test_unit_square_tiling():
    pair = SelfAffinePair.standard((2, 2), (0,))
    translates = [(i, j) for i in range(-1, 3) for j in range(-1, 3)]
    rep = tiling_overlap_check(pair, translates, 8, 20_000, 0, box=((0, 0), (1, 1)))
    assert rep.coverage >= 0.99
    assert rep.overlap_measure <= 0.02
    assert not rep.flagged


def test_duplicate_translate_is_flagged():
    pair = SelfAffinePair.standard((2, 2), (0,))
    rep = tiling_overlap_check(pair, [(0, 0), (0, 0)], 8, 20_000, 0, box=((0, 0), (1, 1)))
    assert rep.flagged
    assert rep.overlap_measure == pytest.approx(1.0, abs=0.02)


def test_overlap_shrinks_with_level():
    pair = pair33()
    translates = [(i, j) for i in range(-2, 3) for j in range(-2, 3)]
    box = ((0, 0), (1, 1))
    coarse = tiling_overlap_check(pair, translates, 3, 20_000, 0, box=box).overlap_measure
    fine = tiling_overlap_check(pair, translates, 7, 20_000, 0, box=box).overlap_measure
    assert fine < coarse


def test_refinement_nesting_exact():
    pair = SelfAffinePair.standard((2, -3), ("3/2",))
    coarse = approximate(pair, 2, exact_mode=True).exact_points
    fine = approximate(pair, 3, exact_mode=True).exact_points
    # level-(n+1) words truncated to their first n digits give the level-n points
    m = len(pair.digits)
    truncated = set()
    for idx in range(m ** 3):
        word = [(idx // m ** k) % m for k in (2, 1)]
        truncated.add(digit_expansion_point(pair, word))
    assert set(coarse) <= truncated
    assert len(fine) == m ** 3


def test_set_equation_on_clouds():
    pair = SelfAffinePair.standard((3, 2), (1,))
    low = approximate(pair, 2, exact_mode=True).exact_points
    high = approximate(pair, 3, exact_mode=True).exact_points
    mat = pair.matrix()
    lhs = Counter(tuple(sum(mat[i][j] * q[j] for j in range(2)) for i in range(2)) for q in high)
    rhs = Counter(tuple(a + b for a, b in zip(q, dv)) for q in low for dv in pair.digits)
    assert lhs == rhs


@pytest.mark.parametrize("p,s", [((2, 2), (1,)), ((3, -2), ("5/2",)), ((2, 2, 2), (1, -1))])
def test_hausdorff_contraction(p, s):
    pair = SelfAffinePair.standard(p, s)
    top = 8 if len(p) == 2 else 5
    for n in range(top):
        d = hausdorff(level_points(pair, n), level_points(pair, n + 1))
        assert d <= pair.cell_radius(n)


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.sampled_from([-5, -4, -3, -2, 2, 3, 4, 5]), min_size=2, max_size=3),
    st.data(),
)
def test_exact_and_float_backends_agree(p, data):
    s = data.draw(st.lists(st.fractions(-10, 10, max_denominator=20), min_size=len(p) - 1,
                           max_size=len(p) - 1))
    pair = SelfAffinePair.standard(p, s)
    word = data.draw(st.lists(st.integers(0, len(pair.digits) - 1), min_size=1, max_size=10))
    exact = np.array(digit_expansion_point(pair, word), dtype=float)
    approx = digit_expansion_point(pair, word, exact_mode=False)
    assert np.abs(exact - approx).max() < 1e-10


def test_csv_round_trip_is_bitwise():
    pts = approximate(pair33(), 3).points
    text = cloud_to_csv(pts, 2, 3)
    assert text.startswith("# tiletopo cloud d=2 n=3\n")
    back, meta = cloud_from_csv(text)
    assert meta == {"d": 2, "n": 3}
    assert cloud_to_csv(back, 2, 3) == text
    assert np.array_equal(back, pts)


def test_adjacency_small_cases():
    assert cell_graph_connected(SelfAffinePair.standard((2, 2), (1,)))
    assert not cell_graph_connected(SelfAffinePair.standard((2, 2), (3,)))
