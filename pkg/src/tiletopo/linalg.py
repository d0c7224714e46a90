"""Words over a finite alphabet, componentwise vector algebra and coordinate projections.

Vectors are plain tuples. Entries may be ``fractions.Fraction`` (exact backend)
or ``float`` (bulk backend); every operation preserves the entry type it is given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational, Real
from typing import Sequence

from .errors import DimensionError, InvalidParameterError, InvalidWordError

MAX_PERIODIC_LENGTH = 64

Vec = tuple


def exact(value) -> Fraction:
    """Convert an int, Fraction, float or ``"a/b"`` / decimal string to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, Rational):
        return Fraction(int(value.numerator), int(value.denominator))
    if isinstance(value, Real):
        if not math.isfinite(value):
            raise InvalidParameterError(f"non-finite value {value!r}")
        return Fraction(value)
    raise InvalidParameterError(f"cannot interpret {value!r} as a number")


def exact_vec(values: Sequence) -> Vec:
    return tuple(exact(v) for v in values)


def float_vec(values: Sequence) -> Vec:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Word:
    """A finite word, or the eventually periodic word ``prefix + period period ...``.

    ``period`` is empty for finite words.
    """

    prefix: tuple[int, ...]
    alphabet_size: int
    period: tuple[int, ...] = ()

    def __post_init__(self):
        if self.alphabet_size < 2:
            raise InvalidWordError(f"alphabet size must be >= 2, got {self.alphabet_size}")
        object.__setattr__(self, "prefix", tuple(int(i) for i in self.prefix))
        object.__setattr__(self, "period", tuple(int(i) for i in self.period))
        for i in self.prefix + self.period:
            if not 0 <= i < self.alphabet_size:
                raise InvalidWordError(f"symbol {i} outside alphabet of size {self.alphabet_size}")
        if self.period and len(self.prefix) + len(self.period) > MAX_PERIODIC_LENGTH:
            raise InvalidWordError(
                f"prefix+period length exceeds {MAX_PERIODIC_LENGTH}")

    @classmethod
    def finite(cls, symbols: Sequence[int], m: int) -> "Word":
        return cls(tuple(symbols), m)

    @classmethod
    def periodic(cls, prefix: Sequence[int], period: Sequence[int], m: int) -> "Word":
        if len(period) == 0:
            raise InvalidWordError("repeating block must be nonempty")
        return cls(tuple(prefix), m, tuple(period))

    @property
    def is_finite(self) -> bool:
        return not self.period

    def __len__(self):
        if self.period:
            raise TypeError("infinite word has no length")
        return len(self.prefix)

    def concat(self, other: "Word") -> "Word":
        if not self.is_finite:
            raise InvalidWordError("cannot append to an infinite word")
        if other.alphabet_size != self.alphabet_size:
            raise InvalidWordError("alphabet mismatch")
        return Word(self.prefix + other.prefix, self.alphabet_size, other.period)

    def truncate(self, n: int) -> "Word":
        """First ``n`` symbols as a finite word."""
        out = list(self.prefix[:n])
        if self.period:
            while len(out) < n:
                out.extend(self.period)
        return Word(tuple(out[:n]), self.alphabet_size)


def _finite_value(symbols: Sequence[int], m: int) -> Fraction:
    acc = 0
    for i in symbols:
        acc = acc * m + i
    return Fraction(acc, m ** len(symbols))


def varphi(w: Word) -> Fraction:
    """Base-``m`` value sum_{n>=1} i_n m^-n of a finite or eventually periodic word."""
    m = w.alphabet_size
    head = _finite_value(w.prefix, m)
    if w.is_finite:
        return head
    block = _finite_value(w.period, m)
    k = len(w.period)
    tail = block / (1 - Fraction(1, m ** k))
    return head + tail / m ** len(w.prefix)


def _check_finite(x: Sequence):
    for v in x:
        if isinstance(v, float) and not math.isfinite(v):
            raise InvalidParameterError(f"non-finite component {v!r}")


def boxdot(x: Sequence, y: Sequence) -> Vec:
    """Componentwise product."""
    if len(x) != len(y):
        raise DimensionError(f"length mismatch: {len(x)} vs {len(y)}")
    _check_finite(x)
    _check_finite(y)
    return tuple(a * b for a, b in zip(x, y))


def _sign(v) -> int:
    return int(v > 0) - int(v < 0)


def sign_abs(x: Sequence) -> tuple[Vec, Vec]:
    """Return ``(sign(x), x+)`` where ``x+`` holds the absolute values."""
    _check_finite(x)
    signs = tuple(_sign(v) for v in x)
    return signs, tuple(s * v for s, v in zip(signs, x))


def split_coords(x: Sequence) -> tuple[Vec, object]:
    """Split a point of R^d into horizontal coordinates and height."""
    if len(x) < 2:
        raise DimensionError(f"need d >= 2 to split coordinates, got d={len(x)}")
    return tuple(x[:-1]), x[-1]


def sup_norm(x: Sequence):
    return max((abs(v) for v in x), default=0)
