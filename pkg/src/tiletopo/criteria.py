"""Closed-form topology classifiers for the triangular tile family and its relatives."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from numbers import Rational
from typing import Sequence

from .errors import HypothesisViolationError, InvalidParameterError

FLOAT_EQUALITY_BAND = 1e-12


class Classification(str, Enum):
    DISCONNECTED = "disconnected"
    CONNECTED_NOT_INTERIOR_CONNECTED = "connected_not_interior_connected"
    TAME_BALL = "tame_ball"


@dataclass(frozen=True)
class TopologyVerdict:
    criterion_value: Fraction | float
    classification: Classification
    exact: bool
    # float mode only: value fell inside the equality band around 1
    near_boundary: bool = False

    def line(self) -> str:
        return f"criterion={float(self.criterion_value):.6f} classification={self.classification.value}"


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def _is_exact(v) -> bool:
    return isinstance(v, (Rational, str)) and not isinstance(v, bool)


def _num(v, exact: bool):
    if exact:
        return Fraction(v.strip()) if isinstance(v, str) else Fraction(v)
    v = float(v)
    if not math.isfinite(v):
        raise InvalidParameterError(f"non-finite value {v}")
    return v


def _check_p(values):
    for v in values:
        if int(v) != v or abs(int(v)) < 2:
            raise InvalidParameterError(f"expected integer with |p| >= 2, got {v}")


def criterion_value(p: Sequence[int], s: Sequence, p_d: int):
    """``max_j |s_j / (p_j (p_j - sign(p_d)))|``; a Fraction when every ``s_j`` is rational."""
    _check_p(list(p) + [p_d])
    if len(p) != len(s):
        raise InvalidParameterError("p and s must have equal length")
    exact = all(_is_exact(v) for v in s)
    sd = _sign(p_d)
    zero = Fraction(0) if exact else 0.0
    return max((abs(_num(sj, exact) / (int(pj) * (int(pj) - sd))) for pj, sj in zip(p, s)), default=zero)


def classify(p: Sequence[int], s: Sequence, p_d: int) -> TopologyVerdict:
    """Trichotomy: disconnected / connected with disconnected interior / tame ball."""
    value = criterion_value(p, s, p_d)
    exact = isinstance(value, Fraction)
    near = False
    if exact:
        cmp = (value > 1) - (value < 1)
    else:
        near = abs(value - 1) <= FLOAT_EQUALITY_BAND
        cmp = 0 if near else ((value > 1) - (value < 1))
    label = {
        -1: Classification.TAME_BALL,
        0: Classification.CONNECTED_NOT_INTERIOR_CONNECTED,
        1: Classification.DISCONNECTED,
    }[cmp]
    return TopologyVerdict(value, label, exact, near)


def deng_lau_2d(p: int, q: int, a, b: Sequence, cyclic: bool = False):
    """Connectedness test for the planar family with lower-triangular ``[[p, 0], [-a, q]]``.

    Returns the per-index values and whether all are at most 1.  Indices pair
    consecutive digits ``b_i, b_{i+1}``; ``cyclic`` also pairs ``b_{|p|-1}`` with ``b_0``.
    """
    _check_p([p, q])
    p, q = int(p), int(q)
    if len(b) != abs(p):
        raise InvalidParameterError(f"need {abs(p)} offsets b_i, got {len(b)}")
    exact = _is_exact(a) and all(_is_exact(v) for v in b)
    a = _num(a, exact)
    b = [_num(v, exact) for v in b]
    sp = _sign(p)
    if exact:
        common = (sp * (b[0] - b[-1]) - a) / (q * (q - sp))
        values = [abs(Fraction(b[i + 1] - b[i], 1) / q + common) for i in range(len(b) - 1)]
    else:
        common = (sp * (b[0] - b[-1]) - a) / (q * (q - sp))
        values = [abs((b[i + 1] - b[i]) / q + common) for i in range(len(b) - 1)]
    if cyclic:
        values.append(abs((b[0] - b[-1]) / q + common))
    slack = 0 if exact else FLOAT_EQUALITY_BAND
    return values, all(v <= 1 + slack for v in values)


def ball_3d(r: int, s, t) -> bool:
    """Ball test ``|s + t| < |r (r - 1)|``, valid only when ``s t >= 0``."""
    _check_p([r])
    exact = _is_exact(s) and _is_exact(t)
    s, t = _num(s, exact), _num(t, exact)
    if s * t < 0:
        raise HypothesisViolationError("criterion requires s*t >= 0")
    r = int(r)
    return abs(s + t) < abs(r * (r - 1))
