"""Self-affine pairs with upper-triangular expanding matrices and their tiles.

The matrix has the block form ``[[diag(p_1..p_{d-1}), -s], [0, p_d]]`` and the
standard digit set is the integer box ``prod_j {0, .., |p_j|-1}``, optionally with a
horizontal offset ``a_k`` added to every digit of vertical layer ``k``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import (
    DimensionError,
    InvalidParameterError,
    InvalidWordError,
    ResourceError,
    UnsupportedConfigurationError,
)
from .linalg import exact, exact_vec

DEFAULT_POINT_BUDGET = 2_000_000
# Cells are padded by this much so that exactly touching pieces register as touching.
CELL_PAD = 1e-9


@dataclass(frozen=True)
class SelfAffinePair:
    """Expanding matrix ``A`` of the triangular family together with a digit set."""

    p: tuple[int, ...]
    s: tuple[Fraction, ...]
    digits: tuple[tuple[Fraction, ...], ...]
    offsets: tuple[tuple[Fraction, ...], ...] | None = None

    def __post_init__(self):
        p = tuple(int(v) for v in self.p)
        if len(p) < 2:
            raise DimensionError("dimension must be at least 2")
        if any(abs(v) < 2 for v in p):
            raise InvalidParameterError(f"all |p_j| must be >= 2, got {p}")
        s = exact_vec(self.s)
        if len(s) != len(p) - 1:
            raise DimensionError(f"slant needs {len(p) - 1} entries, got {len(s)}")
        digits = tuple(exact_vec(dv) for dv in self.digits)
        if not digits:
            raise InvalidParameterError("digit set is empty")
        if any(len(dv) != len(p) for dv in digits):
            raise DimensionError("digit vectors must have length d")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "digits", digits)

    @classmethod
    def standard(cls, p: Sequence[int], s: Sequence, offsets: Sequence[Sequence] | None = None):
        """Product digit set, with optional per-layer horizontal offsets."""
        p = tuple(int(v) for v in p)
        d = len(p)
        if any(abs(v) < 2 for v in p):
            raise InvalidParameterError(f"all |p_j| must be >= 2, got {p}")
        q = abs(p[-1])
        if offsets is not None:
            offsets = tuple(exact_vec(a) for a in offsets)
            if len(offsets) != q or any(len(a) != d - 1 for a in offsets):
                raise DimensionError(f"need {q} offsets of length {d - 1}")
        ranges = [range(abs(v)) for v in p]
        digits = []
        for idx in itertools.product(*ranges):
            k = idx[-1]
            horiz = [Fraction(i) for i in idx[:-1]]
            if offsets is not None:
                horiz = [h + a for h, a in zip(horiz, offsets[k])]
            digits.append(tuple(horiz) + (Fraction(k),))
        return cls(p, tuple(s), tuple(digits), offsets)

    @property
    def d(self) -> int:
        return len(self.p)

    @property
    def layers(self) -> int:
        return abs(self.p[-1])

    @property
    def is_standard(self) -> bool:
        return self.digits == SelfAffinePair.standard(self.p, self.s, self.offsets).digits

    @property
    def has_integer_digits(self) -> bool:
        return all(v.denominator == 1 for dv in self.digits for v in dv)

    def matrix(self) -> list[list[Fraction]]:
        d = self.d
        a = [[Fraction(0)] * d for _ in range(d)]
        for j in range(d):
            a[j][j] = Fraction(self.p[j])
        for j in range(d - 1):
            a[j][d - 1] = -self.s[j]
        return a

    @cached_property
    def A(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.matrix()])

    @cached_property
    def digit_array(self) -> np.ndarray:
        return np.array([[float(v) for v in dv] for dv in self.digits])

    @cached_property
    def _p_float(self) -> np.ndarray:
        return np.array(self.p, dtype=float)

    @cached_property
    def _s_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.s])

    # -- triangular solves -------------------------------------------------
    def solve_exact(self, x: Sequence) -> tuple[Fraction, ...]:
        """``A^-1 x`` by back-substitution in exact arithmetic."""
        x = exact_vec(x)
        if len(x) != self.d:
            raise DimensionError("vector length does not match dimension")
        a = self.matrix()
        d = self.d
        y = [Fraction(0)] * d
        for i in range(d - 1, -1, -1):
            acc = x[i] - sum(a[i][j] * y[j] for j in range(i + 1, d))
            y[i] = acc / a[i][i]
        return tuple(y)

    def solve(self, x: np.ndarray) -> np.ndarray:
        """``A^-1 x`` for an array of row vectors, by back-substitution."""
        x = np.asarray(x, dtype=float)
        y = np.empty_like(x)
        height = x[..., -1] / self._p_float[-1]
        y[..., -1] = height
        y[..., :-1] = (x[..., :-1] + self._s_float * height[..., None]) / self._p_float[:-1]
        return y

    def apply(self, x: np.ndarray) -> np.ndarray:
        """``A x`` for an array of row vectors."""
        x = np.asarray(x, dtype=float)
        out = x * self._p_float
        out[..., :-1] -= self._s_float * x[..., -1:]
        return out

    def inverse_power_matrix(self, n: int) -> np.ndarray:
        """Dense ``A^-n``, built column by column from back-substitution."""
        m = np.eye(self.d)
        for _ in range(n):
            m = self.solve(m.T).T
        return m

    # -- bounds ------------------------------------------------------------
    @cached_property
    def radius_bound(self) -> float:
        """Upper bound for sup-norm of any point of T (digit-sum tail bound)."""
        burn_in = 60
        rho = 1.0 / min(abs(v) for v in self.p)
        smax = max((abs(float(v)) for v in self.s), default=0.0)
        m = np.eye(self.d)
        head = 0.0
        for _ in range(1, burn_in):
            m = self.solve(m.T).T
            head += np.abs(m).sum(axis=1).max()
        k = burn_in
        geo = rho ** k / (1 - rho)
        arith = rho ** k * (k * (1 - rho) + rho) / (1 - rho) ** 2
        tail = geo + rho * smax * arith
        dmax = np.abs(self.digit_array).max()
        return float(dmax * (head + tail) * (1 + 1e-12))

    def cell_radius(self, n: int) -> float:
        norm = np.abs(self.inverse_power_matrix(n)).sum(axis=1).max()
        return float(norm * self.radius_bound)

    @cached_property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box containing T, from iterating the set equation on boxes."""
        r = self.radius_bound
        lo, hi = np.full(self.d, -r), np.full(self.d, r)
        inv = self.inverse_power_matrix(1)
        for _ in range(2000):
            new_lo, new_hi = _ifs_step(inv, self.digit_array, lo, hi)
            if np.array_equal(new_lo, lo) and np.array_equal(new_hi, hi):
                break
            lo, hi = new_lo, new_hi
        pad = 1e-12 * (1 + np.abs(hi - lo))
        return lo - pad, hi + pad

    def cross_section_center_shift(self) -> np.ndarray:
        """Center of the one-dimensional tile of each horizontal coordinate digit range."""
        return np.array([(abs(v) - 1) / 2 for v in self.p[:-1]], dtype=float)


# -- digit expansions ----------------------------------------------------------

def _validate_word(pair: SelfAffinePair, word: Sequence[int]) -> tuple[int, ...]:
    word = tuple(int(i) for i in word)
    n = len(pair.digits)
    for i in word:
        if not 0 <= i < n:
            raise InvalidWordError(f"digit index {i} outside 0..{n - 1}")
    return word


def digit_expansion_point(pair: SelfAffinePair, word: Sequence[int], exact_mode: bool = True):
    """``sum_k A^-k d_{i_k}`` for a finite word of digit indices (Horner form)."""
    word = _validate_word(pair, word)
    if exact_mode:
        acc = tuple(Fraction(0) for _ in range(pair.d))
        for i in reversed(word):
            acc = pair.solve_exact(tuple(a + b for a, b in zip(acc, pair.digits[i])))
        return acc
    acc = np.zeros(pair.d)
    digits = pair.digit_array
    for i in reversed(word):
        acc = pair.solve(acc + digits[i])
    return acc


@dataclass(frozen=True)
class TileApproximation:
    level: int
    points: np.ndarray
    cell_radius: float
    exact_points: tuple | None = field(default=None, compare=False)

    def __len__(self):
        return len(self.points)


def cloud_size(pair: SelfAffinePair, n: int) -> int:
    return len(pair.digits) ** n


def level_points(pair: SelfAffinePair, n: int) -> np.ndarray:
    """All level-``n`` truncated sums, row ``i`` for the word with base-#D index ``i``."""
    pts = np.zeros((1, pair.d))
    digits = pair.digit_array
    for _ in range(n):
        pts = pair.solve(digits[:, None, :] + pts[None, :, :]).reshape(-1, pair.d)
    return pts


def approximate(pair: SelfAffinePair, n: int, budget: int = DEFAULT_POINT_BUDGET,
                exact_mode: bool = False) -> TileApproximation:
    """Enumerate every truncated digit sum of length ``n``."""
    if n < 0:
        raise InvalidParameterError("level must be >= 0")
    count = cloud_size(pair, n)
    if count > budget:
        raise ResourceError(f"level {n} needs {count} points, budget is {budget}")
    exact_points = None
    if exact_mode:
        pts = [tuple(Fraction(0) for _ in range(pair.d))]
        for _ in range(n):
            pts = [pair.solve_exact(tuple(a + b for a, b in zip(q, dv)))
                   for dv in pair.digits for q in pts]
        exact_points = tuple(pts)
        points = np.array([[float(v) for v in q] for q in pts])
    else:
        points = level_points(pair, n)
    return TileApproximation(n, points, pair.cell_radius(n), exact_points)


# -- cell coverings ----------------------------------------------------------------
#
# For the IFS x -> A^-1 (x + e), e in E, with attractor X and a box K containing X,
# the level-n covering is the union of q + A^-n K over level-n points q.  It contains
# X, and z lies in it iff A z - e lies in the level-(n-1) covering for some e, so
# membership is decided by a pruned descent.  E = D gives T; E = D - D gives T - T.

def _box_image(mat: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    c = (lo + hi) / 2
    h = (hi - lo) / 2
    cc = mat @ c
    hh = np.abs(mat) @ h
    return cc - hh, cc + hh


def _ifs_step(inv: np.ndarray, shifts: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    """Bounding box of the union of A^-1 (box + e)."""
    c = (lo + hi) / 2
    h = (hi - lo) / 2
    centers = (shifts + c) @ inv.T
    rad = np.abs(inv) @ h
    return (centers - rad).min(axis=0), (centers + rad).max(axis=0)


class CellCovering:
    """Level-``n`` covering ``union_q (q + A^-n K)`` of an IFS attractor."""

    def __init__(self, pair: SelfAffinePair, n: int, shifts: np.ndarray | None = None,
                 base_box: tuple[np.ndarray, np.ndarray] | None = None):
        if n < 0:
            raise InvalidParameterError("level must be >= 0")
        self.pair = pair
        self.n = n
        self.shifts = pair.digit_array if shifts is None else np.asarray(shifts, dtype=float)
        if base_box is None:
            base_box = pair.bounding_box
        self.k_lo = np.asarray(base_box[0], dtype=float) - CELL_PAD
        self.k_hi = np.asarray(base_box[1], dtype=float) + CELL_PAD
        inv = pair.inverse_power_matrix(1)
        # prune[m] contains the level-m covering
        self._prune = [(self.k_lo, self.k_hi)]
        for _ in range(n):
            lo, hi = _ifs_step(inv, self.shifts, *self._prune[-1])
            self._prune.append((lo - CELL_PAD, hi + CELL_PAD))

    def box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis-aligned box containing the whole covering."""
        return self._prune[self.n]

    def contains(self, z: np.ndarray, count: bool = False) -> np.ndarray:
        """Membership of each row of ``z``; with ``count`` the number of cells hit."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        ids = np.arange(len(z))
        lo, hi = self._prune[self.n]
        keep = np.all((z >= lo) & (z <= hi), axis=1)
        ids, pts = ids[keep], z[keep]
        for m in range(self.n, 0, -1):
            if len(pts) == 0:
                break
            cand = self.pair.apply(pts)[:, None, :] - self.shifts[None, :, :]
            lo, hi = self._prune[m - 1]
            rows, cols = np.nonzero(np.all((cand >= lo) & (cand <= hi), axis=2))
            ids = ids[rows]
            pts = cand[rows, cols]
        hits = np.bincount(ids, minlength=len(z))
        return hits if count else hits > 0


def estimate_measure(pair: SelfAffinePair, n: int, samples: int, seed: int) -> float:
    """Monte-Carlo measure of the level-``n`` cell covering of T."""
    if n < 1 or samples < 1:
        raise InvalidParameterError("n and samples must be >= 1")
    if not pair.has_integer_digits:
        raise UnsupportedConfigurationError("measure estimate needs an integer digit set")
    cover = CellCovering(pair, n)
    lo, hi = cover.box()
    rng = np.random.default_rng(seed)
    z = lo + (hi - lo) * rng.random((samples, pair.d))
    frac = _chunked(cover.contains, z).mean()
    return float(np.prod(hi - lo) * frac)


def _chunked(fn, z: np.ndarray, chunk: int = 20_000) -> np.ndarray:
    return np.concatenate([fn(z[i:i + chunk]) for i in range(0, len(z), chunk)]) if len(z) else np.zeros(0)


@dataclass(frozen=True)
class TilingReport:
    level: int
    samples: int
    seed: int
    box: tuple[tuple[float, ...], tuple[float, ...]]
    coverage: float
    overlap_measure: float
    duplicate_translates: tuple[tuple[float, ...], ...]

    @property
    def flagged(self) -> bool:
        return bool(self.duplicate_translates)


def tiling_overlap_check(pair: SelfAffinePair, translates: Iterable[Sequence[float]], n: int,
                         samples: int, seed: int, box=None) -> TilingReport:
    """Coverage of a sampling box by lattice translates of the level-``n`` covering."""
    translates = np.array([list(map(float, t)) for t in translates], dtype=float)
    if translates.size == 0:
        raise InvalidParameterError("translate list is empty")
    if translates.shape[1] != pair.d:
        raise DimensionError("translates must have length d")
    if not pair.has_integer_digits:
        raise UnsupportedConfigurationError("tiling check needs an integer digit set")
    cover = CellCovering(pair, n)
    if box is None:
        lo, hi = cover.box()
        box = (translates.min(axis=0) + lo, translates.max(axis=0) + hi)
    blo = np.asarray(box[0], dtype=float)
    bhi = np.asarray(box[1], dtype=float)
    rng = np.random.default_rng(seed)
    z = blo + (bhi - blo) * rng.random((samples, pair.d))
    counts = np.zeros(samples, dtype=np.int64)
    for t in translates:
        counts += _chunked(lambda zz: cover.contains(zz - t, count=True) > 0, z).astype(np.int64)
    vol = float(np.prod(bhi - blo))
    seen, dups = set(), []
    for t in map(tuple, translates):
        if t in seen:
            dups.append(t)
        seen.add(t)
    return TilingReport(
        level=n, samples=samples, seed=seed,
        box=(tuple(blo), tuple(bhi)),
        coverage=float((counts >= 1).mean()),
        overlap_measure=vol * float((counts >= 2).mean()),
        duplicate_translates=tuple(dups),
    )


# -- connectedness via the cell adjacency graph ----------------------------------

def level_labels(pair: SelfAffinePair, n: int) -> np.ndarray:
    """``A^n q`` for every level-``n`` point ``q``, in the order of ``level_points``.

    Uses ``A^n q(i w) = A^(n-1) d_i + A^(n-1) q(w)``; integer-valued for integer pairs.
    """
    labels = np.zeros((1, pair.d))
    digits = pair.digit_array
    power = np.eye(pair.d)
    for _ in range(n):
        labels = (digits @ power.T)[:, None, :] + labels[None, :, :]
        labels = labels.reshape(-1, pair.d)
        power = pair.A @ power
    return labels


def difference_covering(pair: SelfAffinePair, refine: int) -> CellCovering:
    """Covering of ``T - T`` at level ``refine`` (shifts ``D - D``, base box ``K - K``)."""
    digits = pair.digit_array
    diffs = np.unique((digits[:, None, :] - digits[None, :, :]).reshape(-1, pair.d), axis=0)
    lo, hi = pair.bounding_box
    return CellCovering(pair, refine, shifts=diffs, base_box=(lo - hi, hi - lo))


def adjacency_graph(pair: SelfAffinePair, level: int = 4, refine: int = 6):
    """Edges between level-``level`` cells ``q + A^-level C`` that intersect.

    ``C`` is the level-``refine`` covering of T.  Two cells meet iff
    ``A^level (q' - q)`` lies in ``C - C``.  Returns ``(points, edges)``.
    """
    if cloud_size(pair, level) > DEFAULT_POINT_BUDGET:
        raise ResourceError("adjacency graph exceeds point budget")
    pts = level_points(pair, level)
    labels = level_labels(pair, level)
    cover = difference_covering(pair, refine)
    lo, hi = cover.box()
    reach = np.maximum(np.abs(lo), np.abs(hi))
    # candidate pairs: label differences inside the box of C - C
    tree = cKDTree(labels / reach)
    pairs = tree.query_pairs(1 + 1e-9, p=np.inf, output_type="ndarray")
    if len(pairs) == 0:
        return pts, np.zeros((0, 2), dtype=np.int64)
    delta = labels[pairs[:, 1]] - labels[pairs[:, 0]]
    uniq, inverse = np.unique(np.round(delta, 9), axis=0, return_inverse=True)
    ok = cover.contains(uniq)
    return pts, pairs[ok[np.ravel(inverse)]]


def cell_graph_connected(pair: SelfAffinePair, level: int = 4, refine: int = 6) -> bool:
    pts, edges = adjacency_graph(pair, level, refine)
    n = len(pts)
    if n == 1:
        return True
    g = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
    ncomp, _ = connected_components(g, directed=False)
    return bool(ncomp == 1)


# -- CSV interchange -------------------------------------------------------------

def format_float(v: float) -> str:
    return format(float(v), ".17g")


def cloud_to_csv(points: np.ndarray, d: int, n: int) -> str:
    lines = [f"# tiletopo cloud d={d} n={n}"]
    for row in np.atleast_2d(points):
        lines.append(",".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def cloud_from_csv(text: str) -> tuple[np.ndarray, dict]:
    meta = {}
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if not line[1:].lstrip().startswith("tiletopo"):
                continue
            for tok in line[1:].split():
                if "=" in tok:
                    k, v = tok.split("=", 1)
                    meta[k] = int(v) if v.lstrip("-").isdigit() else v
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError as exc:
            raise InvalidParameterError(f"line {lineno}: bad coordinate ({exc})") from None
    d = meta.get("d")
    arr = np.array(rows, dtype=float).reshape(-1, d if d else (len(rows[0]) if rows else 0))
    return arr, meta
