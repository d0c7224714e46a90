from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tiletopo.criteria import Classification, ball_3d, classify, criterion_value, deng_lau_2d
from tiletopo.errors import HypothesisViolationError, InvalidParameterError


def test_criterion_value_examples():
    assert criterion_value((3, 3), (2, "9/5"), 3) == Fraction(1, 3)
    assert criterion_value((3, 3), (0, 0), 3) == 0
    assert criterion_value((2,), (2,), 2) == 1


def test_criterion_rejects_small_p():
    with pytest.raises(InvalidParameterError):
        criterion_value((1, 3), (0, 0), 3)
    with pytest.raises(InvalidParameterError):
        criterion_value((3,), (0,), -1)


def test_classify_examples():
    assert classify((3, 3), (2, "9/5"), 3).classification is Classification.TAME_BALL
    v = classify((2,), (2,), 2)
    assert v.classification is Classification.CONNECTED_NOT_INTERIOR_CONNECTED
    assert v.exact
    assert classify((2,), (3,), 2).classification is Classification.DISCONNECTED


def test_classify_float_band_is_flagged():
    v = classify((2,), (2.0 + 1e-14,), 2)
    assert not v.exact and v.near_boundary
    assert v.classification is Classification.CONNECTED_NOT_INTERIOR_CONNECTED


def test_verdict_line():
    assert classify((3, 3), (2, "9/5"), 3).line() == "criterion=0.333333 classification=tame_ball"


def test_deng_lau_examples():
    values, ok = deng_lau_2d(2, 2, 0, (0, 0))
    assert values == [0] and ok
    values, ok = deng_lau_2d(2, 2, 2, (0, 0))
    assert values == [1] and ok
    values, ok = deng_lau_2d(2, 2, 0, (0, 3))
    assert values == [0] and ok


def test_deng_lau_cyclic_option_adds_wrap_term():
    values, _ = deng_lau_2d(3, 2, 0, (0, 1, 5), cyclic=True)
    assert len(values) == 3


def test_deng_lau_length_mismatch():
    with pytest.raises(InvalidParameterError):
        deng_lau_2d(3, 2, 0, (0, 0))


def test_ball_3d_examples():
    assert ball_3d(2, 0, 0)
    assert ball_3d(2, 1, "1/2")
    assert not ball_3d(2, 1, 1)
    with pytest.raises(HypothesisViolationError):
        ball_3d(2, 1, -1)


ps = st.lists(st.sampled_from([-4, -3, -2, 2, 3, 4]), min_size=1, max_size=3)
fracs = st.fractions(-20, 20, max_denominator=30)


@given(ps, st.sampled_from([-4, -3, -2, 2, 3, 4]), st.data(), fracs)
def test_scale_equivariance(p, pd, data, lam):
    s = data.draw(st.lists(fracs, min_size=len(p), max_size=len(p)))
    scaled = [lam * v for v in s]
    assert criterion_value(p, scaled, pd) == abs(lam) * criterion_value(p, s, pd)


@given(st.sampled_from([-4, -3, -2, 2, 3, 4]), fracs, fracs)
def test_ball_3d_symmetries(r, s, t):
    if s * t < 0:
        return
    assert ball_3d(r, s, t) == ball_3d(r, t, s) == ball_3d(r, -s, -t)
