"""Slant prisms, path functions and the prism-to-tile iteration.

A prism is stored through two anchor points in R^d, the centres of its bottom and
top cross-sections; every cross-section is a translate of ``U = [-1/2, 1/2]^(d-1)``.
The children of the base prism are its images under the affine maps
``G_k(x) = A^-1 (x + (mu + a_k, k))``, one per vertical layer ``k``, where ``mu``
centres the horizontal digit box.  Deeper prisms are images under compositions.

One iteration on a prism ``Q`` with height ``H`` and ``r`` layers is the composition

1. shear: horizontal shift making ``Q`` the vertical column ``U x [0, H]``;
2. squeeze: ``w -> rho(y) * w``;
3. translation: ``w -> w + x(y)``;
4. flattening: per vertical line, a piecewise linear height map sending the
   surface ``y = zeta_j(w)`` to the interface height ``y_j``;
5. layer shear: horizontal shift carrying column ``U + v_j`` onto child ``j``,
   followed by the inverse of stage 1.

It is the identity on the two boundary planes of the slab of ``Q``, so iterations
of sibling prisms glue into a single bijection of R^d.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import (
    DimensionError,
    DomainError,
    InconsistentParameterError,
    InvalidParameterError,
    UnsupportedConfigurationError,
)
from .linalg import exact, exact_vec, sign_abs, sup_norm
from .tile import SelfAffinePair

HALF = Fraction(1, 2)


# -- path profile ----------------------------------------------------------------

@dataclass(frozen=True)
class PathProfile:
    r: int
    b: Fraction
    eps: Fraction
    u: tuple[tuple[Fraction, ...], ...]
    heuristic: bool = field(default=False, compare=False)

    def __post_init__(self):
        r = int(self.r)
        if r < 2:
            raise InvalidParameterError("r must be >= 2")
        b, eps = exact(self.b), exact(self.eps)
        u = tuple(exact_vec(v) for v in self.u)
        if b <= 0:
            raise InvalidParameterError("b must be positive")
        if not 0 < eps < b / (2 * r):
            raise InvalidParameterError(f"need 0 < eps < b/(2r) = {b / (2 * r)}, got {eps}")
        if len(u) != r - 1:
            raise InvalidParameterError(f"need r-1 = {r - 1} offsets, got {len(u)}")
        if len({len(v) for v in u}) > 1:
            raise DimensionError("offsets must share one length")
        for v in u:
            if sup_norm(v) >= 1:
                raise InvalidParameterError(f"offset {tuple(map(float, v))} has sup-norm >= 1")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        """Horizontal dimension d - 1."""
        return len(self.u[0])

    @cached_property
    def v(self) -> tuple[tuple[Fraction, ...], ...]:
        acc = tuple(Fraction(0) for _ in range(self.dim))
        out = [acc]
        for uk in self.u:
            acc = tuple(a + b for a, b in zip(acc, uk))
            out.append(acc)
        return tuple(out)

    @cached_property
    def y(self) -> tuple[Fraction, ...]:
        return tuple(k * self.b / self.r for k in range(self.r + 1))

    @property
    def c(self) -> Fraction:
        return horizontal_constant(self)


def _window(profile: PathProfile, y):
    if not 0 <= y <= profile.b:
        raise DomainError(f"height {y} outside [0, {profile.b}]")
    for k in range(1, profile.r):
        if abs(y - profile.y[k]) <= profile.eps:
            return k
    return None


def path_x(profile: PathProfile, y) -> tuple:
    """Horizontal path: plateau ``v_k`` between windows, linear ramp inside window ``k``."""
    k = _window(profile, y)
    if k is None:
        layer = min(int(y * profile.r // profile.b), profile.r - 1)
        return profile.v[layer]
    t = (profile.eps + y - profile.y[k]) / (2 * profile.eps)
    return tuple(t * a + b for a, b in zip(profile.u[k - 1], profile.v[k - 1]))


def path_rho(profile: PathProfile, y) -> tuple:
    """Squeeze factors: 1 off the windows, down to ``1 - |u_k|`` at ``y_k``."""
    k = _window(profile, y)
    if k is None:
        return tuple(1 for _ in range(profile.dim))
    _, uplus = sign_abs(profile.u[k - 1])
    t = abs(y - profile.y[k]) / profile.eps
    return tuple(t * a + 1 - a for a in uplus)


def horizontal_constant(profile: PathProfile):
    return sum((sup_norm(uk) for uk in profile.u), Fraction(0))


def partition_boundary(u: Sequence, x: Sequence, tol: float = 1e-12) -> tuple[bool, bool, bool]:
    """Membership of a boundary point of ``U`` in the parts (+, -, vertical) defined by ``u``."""
    if len(u) != len(x):
        raise DimensionError("u and x must have equal length")
    signs, _ = sign_abs(u)
    if not any(signs):
        raise InvalidParameterError("u must be nonzero")
    exact_mode = all(isinstance(v, (int, Fraction)) for v in x)
    if exact_mode:
        def eq(a, b):
            return a == b
    else:
        def eq(a, b):
            return abs(a - b) <= tol
    on_box = all(abs(v) <= HALF or eq(abs(v), HALF) for v in x)
    if not on_box or not any(eq(abs(v), HALF) for v in x):
        raise DomainError("x is not on the boundary of U")
    plus = any(sg != 0 and eq(2 * xj, sg) for xj, sg in zip(x, signs))
    minus = any(sg != 0 and eq(-2 * xj, sg) for xj, sg in zip(x, signs))
    vertical = any(sg == 0 and eq(abs(xj), HALF) for xj, sg in zip(x, signs))
    return plus, minus, vertical


# -- prisms ----------------------------------------------------------------------

@dataclass(frozen=True)
class Prism:
    """Slant prism between horizontal unit boxes centred at ``bottom`` and ``top``.

    ``word`` records the layer digits leading from the base prism of a pair to this
    one; it is empty for the base prism.
    """

    bottom: tuple
    top: tuple
    word: tuple[int, ...] = ()

    def __post_init__(self):
        if len(self.bottom) != len(self.top) or len(self.bottom) < 2:
            raise DimensionError("anchors must share a dimension d >= 2")
        if not self.top[-1] > self.bottom[-1]:
            raise InvalidParameterError("top anchor must lie above the bottom anchor")

    @property
    def d(self) -> int:
        return len(self.bottom)

    @property
    def height(self):
        return self.top[-1] - self.bottom[-1]

    @property
    def slant(self) -> tuple:
        return tuple(t - b for t, b in zip(self.top[:-1], self.bottom[:-1]))

    def center_at(self, y: np.ndarray) -> np.ndarray:
        bot = np.array([float(v) for v in self.bottom])
        top = np.array([float(v) for v in self.top])
        t = (np.asarray(y, dtype=float) - bot[-1]) / (top[-1] - bot[-1])
        return bot[:-1] + t[..., None] * (top[:-1] - bot[:-1])

    def contains(self, pts: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        y = pts[:, -1]
        lo, hi = float(self.bottom[-1]), float(self.top[-1])
        ok = (y >= lo - tol) & (y <= hi + tol)
        off = np.abs(pts[:, :-1] - self.center_at(y)).max(axis=1)
        return ok & (off <= 0.5 + tol)

    def sample(self, n_per_axis: int) -> np.ndarray:
        """Regular grid of ``n_per_axis^d`` points filling the prism, boundary included."""
        t = np.linspace(0.0, 1.0, n_per_axis)
        grids = np.meshgrid(*([t - 0.5] * (self.d - 1) + [t]), indexing="ij")
        g = np.stack([a.ravel() for a in grids], axis=1)
        y = float(self.bottom[-1]) + g[:, -1] * float(self.height)
        out = np.empty_like(g)
        out[:, -1] = y
        out[:, :-1] = g[:, :-1] + self.center_at(y)
        return out

    def lateral_point(self, q: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Point above the bottom-box boundary point ``q`` (centred coordinates) at fraction ``t``."""
        q = np.atleast_2d(q)
        t = np.asarray(t, dtype=float)
        y = float(self.bottom[-1]) + t * float(self.height)
        return np.concatenate([q + self.center_at(y), y[:, None]], axis=1)


def _anchor_shift(pair: SelfAffinePair, k: int) -> tuple[Fraction, ...]:
    mu = [Fraction(abs(v) - 1, 2) for v in pair.p[:-1]]
    if pair.offsets is not None:
        mu = [m + a for m, a in zip(mu, pair.offsets[k])]
    return tuple(mu) + (Fraction(k),)


def _require_standard(pair: SelfAffinePair):
    if not pair.is_standard:
        raise UnsupportedConfigurationError("prism iteration needs a product digit set (optionally offset per layer)")


def _vertical_interval(p_d: int) -> tuple[Fraction, Fraction]:
    q = abs(p_d)
    if p_d > 0:
        return Fraction(0), Fraction(1)
    return Fraction(-q, q + 1), Fraction(1, q + 1)


def base_prism(pair: SelfAffinePair) -> Prism:
    """The prism whose subdivision by the layer maps keeps its top and bottom surfaces."""
    _require_standard(pair)
    q = pair.layers
    p_d = pair.p[-1]
    y_lo, y_hi = _vertical_interval(p_d)
    # child with the lowest image and child with the highest image
    if p_d > 0:
        k_lo, k_hi, lo_from_top, hi_from_top = 0, q - 1, False, True
    else:
        k_lo, k_hi, lo_from_top, hi_from_top = q - 1, 0, True, False
    sh_lo = _anchor_shift(pair, k_lo)
    sh_hi = _anchor_shift(pair, k_hi)
    bottom, top = [], []
    for j, (pj, sj) in enumerate(zip(pair.p[:-1], pair.s)):
        # X_b p = X_src + shift + s y_lo ;  X_t p = X_src' + shift' + s y_hi
        cb = sh_lo[j] + sj * y_lo
        ct = sh_hi[j] + sj * y_hi
        # unknowns (X_b, X_t): matrix [[p - [src=b], -[src=t]], [-[src'=b], p - [src'=t]]]
        m11 = pj - (0 if lo_from_top else 1)
        m12 = -(1 if lo_from_top else 0)
        m21 = -(0 if hi_from_top else 1)
        m22 = pj - (1 if hi_from_top else 0)
        det = m11 * m22 - m12 * m21
        bottom.append((cb * m22 - m12 * ct) / det)
        top.append((m11 * ct - m21 * cb) / det)
    return Prism(tuple(bottom) + (y_lo,), tuple(top) + (y_hi,), ())


def _layer_map_exact(pair: SelfAffinePair, k: int, x: tuple) -> tuple:
    sh = _anchor_shift(pair, k)
    return pair.solve_exact(tuple(a + b for a, b in zip(x, sh)))


def _word_map_exact(pair: SelfAffinePair, word: Sequence[int], x: tuple) -> tuple:
    for k in reversed(word):
        x = _layer_map_exact(pair, k, x)
    return x


def prism_for_word(pair: SelfAffinePair, word: Sequence[int]) -> Prism:
    base = base_prism(pair)
    word = tuple(int(k) for k in word)
    for k in word:
        if not 0 <= k < pair.layers:
            raise InvalidParameterError(f"layer digit {k} outside 0..{pair.layers - 1}")
    a = _word_map_exact(pair, word, base.bottom)
    b = _word_map_exact(pair, word, base.top)
    if a[-1] > b[-1]:
        a, b = b, a
    return Prism(a, b, word)


def children(pair: SelfAffinePair, prism: Prism) -> list[Prism]:
    """Sub-prisms of ``prism`` in order of increasing height."""
    subs = [prism_for_word(pair, prism.word + (k,)) for k in range(pair.layers)]
    return sorted(subs, key=lambda q: q.bottom[-1])


def _check_prism(pair: SelfAffinePair, prism: Prism) -> Prism:
    expected = prism_for_word(pair, prism.word)
    if expected.bottom != tuple(exact_vec(prism.bottom)) or expected.top != tuple(exact_vec(prism.top)):
        if not (np.allclose(np.array(expected.bottom, float), np.array(prism.bottom, float), atol=1e-12)
                and np.allclose(np.array(expected.top, float), np.array(prism.top, float), atol=1e-12)):
            raise InconsistentParameterError("prism is not the subdivision prism of this pair and word")
    return expected


def interface_offsets(pair: SelfAffinePair, prism: Prism) -> tuple[tuple[Fraction, ...], ...]:
    """Offsets ``u_k`` between consecutive children, in units of the cross-section width."""
    subs = children(pair, prism)
    return tuple(tuple(a - b for a, b in zip(subs[k].bottom[:-1], subs[k - 1].top[:-1]))
                 for k in range(1, len(subs)))


def profile_from_pair(pair: SelfAffinePair, eps=None, prism: Prism | None = None) -> PathProfile:
    """Default profile: ``r = |p_d|``, ``b`` = prism height, ``eps = b/(4r)``, offsets from geometry."""
    _require_standard(pair)
    prism = base_prism(pair) if prism is None else prism
    r = pair.layers
    b = exact(prism.height)
    eps = b / (4 * r) if eps is None else exact(eps)
    return PathProfile(r, b, eps, interface_offsets(pair, prism))


# -- vectorised path functions -----------------------------------------------------

def _path_arrays(eta, H, eps, r, u, v):
    """Vectorised ``x(y)`` and ``rho(y)``.

    ``eta``: (N,) local heights; ``H``, ``eps``: (N,); ``u``: (N, r-1, m); ``v``: (N, r, m).
    """
    n = len(eta)
    idx = np.arange(n)
    step = H / r
    j = np.clip(np.rint(eta / step), 1, r - 1).astype(np.int64)
    yj = j * step
    inwin = np.abs(eta - yj) <= eps
    layer = np.clip(np.floor(eta / step), 0, r - 1).astype(np.int64)
    x = v[idx, layer].copy()
    rho = np.ones_like(x)
    if inwin.any():
        w = np.nonzero(inwin)[0]
        uj = u[w, j[w] - 1]
        t = (eps[w] + eta[w] - yj[w]) / (2 * eps[w])
        x[w] = t[:, None] * uj + v[w, j[w] - 1]
        up = np.abs(uj)
        rho[w] = (np.abs(eta[w] - yj[w]) / eps[w])[:, None] * up + 1 - up
    return x, rho


# -- iteration map -----------------------------------------------------------------

class _Frames:
    """Per-point geometry of the prisms that the points currently lie in."""

    def __init__(self, bottom, top, child_bottom, child_top, r, eps_ratio):
        self.bottom = bottom            # (N, d)
        self.top = top                  # (N, d)
        self.yb = bottom[:, -1]
        self.H = top[:, -1] - bottom[:, -1]
        self.slant = top[:, :-1] - bottom[:, :-1]
        self.r = r
        self.eps = eps_ratio * self.H
        self.delta = (self.eps + self.H / (2 * r)) / 2
        step = self.H / r
        ks = np.arange(r + 1)
        self.yk = step[:, None] * ks[None, :]              # local interface heights
        # child anchors in the vertical frame
        def frame(pts, local_y):
            return pts[:, :, :-1] - self.bottom[:, None, :-1] - (local_y / self.H[:, None])[..., None] * self.slant[:, None, :]
        self.e = frame(child_bottom, self.yk[:, :-1])       # (N, r, m)
        self.f = frame(child_top, self.yk[:, 1:])
        self.u = self.e[:, 1:] - self.f[:, :-1]             # (N, r-1, m)
        m = self.u.shape[2]
        self.v = np.concatenate([np.zeros((len(self.H), 1, m)), np.cumsum(self.u, axis=1)], axis=1)

    # stage 1 and its inverse
    def shear(self, w, eta):
        return w - self.bottom[:, :-1] - (eta / self.H)[:, None] * self.slant

    def unshear(self, w, eta):
        return w + self.bottom[:, :-1] + (eta / self.H)[:, None] * self.slant

    def paths(self, eta):
        return _path_arrays(eta, self.H, self.eps, self.r, self.u, self.v)

    def _zone(self, eta):
        step = self.H / self.r
        j = np.clip(np.rint(eta / step), 1, self.r - 1).astype(np.int64)
        yj = j * step
        return j, yj, np.abs(eta - yj) <= self.delta

    def flatten(self, w, eta):
        j, yj, zone = self._zone(eta)
        out = eta.copy()
        if not zone.any():
            return out
        z = np.nonzero(zone)[0]
        zt = self.zeta(w[z], j[z], z)
        moved = zt != yj[z]
        z, zt = z[moved], zt[moved]
        e, yy, dl = eta[z], yj[z], self.delta[z]
        below = e <= zt
        lo = yy - dl
        out[z] = np.where(below,
                          lo + (e - lo) * dl / (zt - lo),
                          yy + (e - zt) * dl / (yy + dl - zt))
        return out

    def unflatten(self, w, eta):
        j, yj, zone = self._zone(eta)
        out = eta.copy()
        if not zone.any():
            return out
        z = np.nonzero(zone)[0]
        zt = self.zeta(w[z], j[z], z)
        moved = zt != yj[z]
        z, zt = z[moved], zt[moved]
        e, yy, dl = eta[z], yj[z], self.delta[z]
        below = e <= yy
        lo = yy - dl
        out[z] = np.where(below,
                          lo + (e - lo) * (zt - lo) / dl,
                          zt + (e - yy) * (yy + dl - zt) / dl)
        return out

    def zeta(self, w, j, rows):
        """Breakpoint surface of the flattening near interface ``j`` (1-based)."""
        uj = self.u[rows, j - 1]
        sg = np.sign(uj)
        au = np.abs(uj)
        with np.errstate(divide="ignore", invalid="ignore"):
            lower = np.where(au > 0, (sg * (w - self.v[rows, j - 1]) + 0.5) / au, np.inf)
            upper = np.where(au > 0, (-sg * (w - self.v[rows, j]) + 0.5) / au, np.inf)
        a = np.clip(1 - lower.min(axis=1), 0, 1)
        ap = np.clip(1 - upper.min(axis=1), 0, 1)
        return self.yk[rows, j] + self.eps[rows] * (ap - a)

    def layer_shift(self, eta):
        step = self.H / self.r
        k = np.clip(np.floor(eta / step), 0, self.r - 1).astype(np.int64)
        idx = np.arange(len(eta))
        t = (eta - k * step) / step
        return self.e[idx, k] + t[:, None] * (self.f[idx, k] - self.e[idx, k]) - self.v[idx, k]

    # the five stages on (w, eta) in the local frame of each point's prism
    def forward_stages(self):
        def s1(w, eta):
            return self.shear(w, eta), eta

        def s2(w, eta):
            _, rho = self.paths(eta)
            return rho * w, eta

        def s3(w, eta):
            x, _ = self.paths(eta)
            return w + x, eta

        def s4(w, eta):
            return w, self.flatten(w, eta)

        def s5(w, eta):
            return self.unshear(w + self.layer_shift(eta), eta), eta

        return [s1, s2, s3, s4, s5]

    def inverse_stages(self):
        def s1(w, eta):
            return self.unshear(w, eta), eta

        def s2(w, eta):
            _, rho = self.paths(eta)
            return w / rho, eta

        def s3(w, eta):
            x, _ = self.paths(eta)
            return w - x, eta

        def s4(w, eta):
            return w, self.unflatten(w, eta)

        def s5(w, eta):
            return self.shear(w, eta) - self.layer_shift(eta), eta

        return [s1, s2, s3, s4, s5]


class IterationMap:
    """The depth-``n`` composition ``h_n`` of prism iterations, evaluable on all of R^d."""

    def __init__(self, pair: SelfAffinePair, prism: Prism, profile: PathProfile, depth: int):
        _require_standard(pair)
        if depth < 0:
            raise InvalidParameterError("depth must be >= 0")
        if profile.r != pair.layers:
            raise InconsistentParameterError(f"profile has r={profile.r}, pair has |p_d|={pair.layers}")
        if profile.dim != pair.d - 1:
            raise DimensionError("profile offsets must have length d-1")
        prism = _check_prism(pair, prism)
        if profile.b != exact(prism.height):
            raise InconsistentParameterError(f"profile height {profile.b} differs from prism height {prism.height}")
        expected = interface_offsets(pair, prism)
        got = np.array(profile.u, dtype=float)
        if not np.allclose(got, np.array(expected, dtype=float), rtol=0, atol=1e-12):
            raise InconsistentParameterError("profile offsets do not match the interface offsets of the prism")
        self.pair = pair
        self.prism = prism
        self.profile = profile
        self.depth = depth
        self._eps_ratio = float(profile.eps / profile.b)
        base = base_prism(pair)
        self._base_anchors = np.array([[float(v) for v in base.bottom], [float(v) for v in base.top]])
        subs = sorted(range(pair.layers), key=lambda k: float(_layer_map_exact(pair, k, base.bottom)[-1]))
        self._child_order = subs                    # layer digits sorted by height
        ch = []
        for k in subs:
            a = _layer_map_exact(pair, k, base.bottom)
            b = _layer_map_exact(pair, k, base.top)
            if a[-1] > b[-1]:
                a, b = b, a
            ch.extend([[float(t) for t in a], [float(t) for t in b]])
        self._child_anchors = np.array(ch)          # (2r, d): bottom/top per ascending child
        self._shifts = np.array([[float(t) for t in _anchor_shift(pair, k)] for k in range(pair.layers)])
        self._ylo = float(prism.bottom[-1])
        self._yhi = float(prism.top[-1])

    def __repr__(self):
        return f"IterationMap(depth={self.depth}, p={self.pair.p})"

    # -- geometry of the level-i prisms ------------------------------------------
    def _words(self, y: np.ndarray, level: int) -> np.ndarray:
        """Layer digits (N, level) of the level-``level`` sub-prism at height ``y``."""
        r = self.pair.layers
        span = self._yhi - self._ylo
        idx = np.floor((y - self._ylo) / span * r ** level).astype(np.int64)
        idx = np.clip(idx, 0, r ** level - 1)
        asc = np.zeros((len(y), level), dtype=np.int64)
        for i in range(level - 1, -1, -1):
            asc[:, i] = idx % r
            idx //= r
        flip = (self.pair.p[-1] < 0) and (len(self.prism.word) % 2 == 1)
        order = np.array(self._child_order)
        digits = np.zeros_like(asc)
        flipped = np.full(len(y), flip)
        for i in range(level):
            pos = np.where(flipped, r - 1 - asc[:, i], asc[:, i])
            digits[:, i] = order[pos]
            if self.pair.p[-1] < 0:
                flipped = ~flipped
        return digits

    def _frames(self, y: np.ndarray, level: int) -> _Frames:
        """Frames for the level-``level`` prisms (relative to the map's prism) at heights ``y``."""
        n = len(y)
        d = self.pair.d
        r = self.pair.layers
        rel = self._words(y, level)
        prefix = np.array(self.prism.word, dtype=np.int64)
        words = np.concatenate([np.broadcast_to(prefix, (n, len(prefix))), rel], axis=1)
        pts = np.concatenate([self._base_anchors, self._child_anchors])   # (2 + 2r, d)
        pts = np.broadcast_to(pts, (n,) + pts.shape).copy()
        for i in range(words.shape[1] - 1, -1, -1):
            pts = self.pair.solve(pts + self._shifts[words[:, i]][:, None, :])
        flip = (self.pair.p[-1] < 0) and (words.shape[1] % 2 == 1)
        bottom, top = pts[:, 0], pts[:, 1]
        ch = pts[:, 2:].reshape(n, r, 2, d)
        if flip:
            bottom, top = top, bottom
            ch = ch[:, ::-1, ::-1]
        return _Frames(bottom, top, ch[:, :, 0], ch[:, :, 1], r, self._eps_ratio)

    def _step(self, pts: np.ndarray, level: int, inverse: bool = False) -> np.ndarray:
        """Apply (or undo) the iterations of all level-``level`` prisms."""
        out = pts.copy()
        y = pts[:, -1]
        inside = (y >= self._ylo) & (y <= self._yhi)
        if not inside.any():
            return out
        sel = np.nonzero(inside)[0]
        fr = self._frames(y[sel], level)
        w = pts[sel, :-1]
        eta = y[sel] - fr.yb
        stages = fr.inverse_stages()[::-1] if inverse else fr.forward_stages()
        for st in stages:
            w, eta = st(w, eta)
        out[sel, :-1] = w
        out[sel, -1] = fr.yb + eta
        return out

    def apply_levels(self, pts: np.ndarray, start: int = 0, stop: int | None = None,
                     inverse: bool = False) -> np.ndarray:
        """Apply the iterations of levels ``start .. stop-1`` (or undo them, deepest first)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.pair.d:
            raise DimensionError(f"points must have {self.pair.d} coordinates")
        stop = self.depth if stop is None else stop
        levels = range(stop - 1, start - 1, -1) if inverse else range(start, stop)
        for level in levels:
            pts = self._step(pts, level, inverse)
        return pts

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return self.apply_levels(pts)

    def inverse(self, pts: np.ndarray) -> np.ndarray:
        return self.apply_levels(pts, inverse=True)

    def trajectory(self, pts: np.ndarray) -> list[np.ndarray]:
        """``[h_0(x), h_1(x), ..., h_depth(x)]``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = [pts]
        for level in range(self.depth):
            pts = self._step(pts, level)
            out.append(pts)
        return out

    def frames(self, pts: np.ndarray, level: int = 0) -> "_Frames":
        """Geometry of the level-``level`` prisms at the heights of ``pts``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self._frames(pts[:, -1], level)

    def stages(self, pts: np.ndarray, level: int = 0):
        """Per-stage (forward, inverse) callables of the level-``level`` iteration at the given points.

        The frames are fixed by the heights of ``pts``; each callable maps an (N, d)
        array of points lying in those same prisms' slabs.
        """
        fr = self.frames(pts, level)

        def wrap(st):
            def run(q):
                w, eta = st(q[:, :-1], q[:, -1] - fr.yb)
                return np.concatenate([w, (fr.yb + eta)[:, None]], axis=1)
            return run

        return list(zip(map(wrap, fr.forward_stages()), map(wrap, fr.inverse_stages())))

    def sub_prisms(self) -> list[Prism]:
        """The level-``depth`` prisms whose union is the image of the map's prism."""
        level = [self.prism]
        for _ in range(self.depth):
            level = [c for q in level for c in children(self.pair, q)]
        return level


def iterate_once(prism: Prism, pair: SelfAffinePair, profile: PathProfile):
    """One iteration: the depth-1 map and the ``r`` sub-prisms covering the image."""
    h = IterationMap(pair, prism, profile, 1)
    return h, h.sub_prisms()


def compose_h(prism: Prism, pair: SelfAffinePair, profile: PathProfile, n: int) -> IterationMap:
    return IterationMap(pair, prism, profile, n)


def union_contains(prisms: Sequence[Prism], pts: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    pts = np.atleast_2d(pts)
    out = np.zeros(len(pts), dtype=bool)
    for q in prisms:
        out |= q.contains(pts, tol)
    return out
