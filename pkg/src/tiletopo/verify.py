"""Numerical checks of the prism iteration: Hausdorff distances, injectivity and height behaviour."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError, InvalidParameterError, ResourceError
from .prism import IterationMap, Prism, PathProfile, compose_h
from .tile import SelfAffinePair, format_float, level_points

COINCIDENCE = 1e-12
MONOTONE_SLACK = 1e-12


@dataclass
class VerificationReport:
    name: str
    params: dict
    seed: int | None
    counts: dict
    stats: dict
    tolerance: dict
    passed: bool
    notes: list = field(default_factory=list)

    def _items(self):
        yield "check", self.name
        yield "passed", "true" if self.passed else "false"
        yield "seed", "none" if self.seed is None else str(self.seed)
        for group, values in (("param", self.params), ("count", self.counts),
                              ("stat", self.stats), ("tol", self.tolerance)):
            for k, v in values.items():
                yield f"{group}.{k}", _fmt(v)

    def to_kv(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self._items())

    def to_text(self) -> str:
        head = f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"
        body = " ".join(f"{k}={v}" for k, v in self._items() if k not in ("check", "passed"))
        lines = [head, "  " + body]
        lines.extend("  note: " + n for n in self.notes)
        return "\n".join(lines) + "\n"


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    if isinstance(v, (tuple, list)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


# -- Hausdorff distance --------------------------------------------------------------

def _as_cloud(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.size == 0 or len(a) == 0:
        raise InvalidParameterError("cloud must be nonempty")
    return a


def directed_hausdorff(a, b, workers: int = 1) -> float:
    """``sup_{x in a} min_{y in b} |x - y|_inf`` using a KD-tree on ``b``."""
    a, b = _as_cloud(a), _as_cloud(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionError("clouds have different dimensions")
    dist, _ = cKDTree(b).query(a, p=np.inf, workers=workers)
    return float(dist.max())


def hausdorff(a, b, workers: int = 1) -> float:
    """Sup-norm Hausdorff distance between two finite clouds."""
    return max(directed_hausdorff(a, b, workers), directed_hausdorff(b, a, workers))


def hausdorff_bruteforce(a, b) -> float:
    a, b = _as_cloud(a), _as_cloud(b)
    if a.shape[1] != b.shape[1]:
        raise DimensionError("clouds have different dimensions")
    dmat = np.abs(a[:, None, :] - b[None, :, :]).max(axis=2)
    return float(max(dmat.min(axis=1).max(), dmat.min(axis=0).max()))


class DigitCloud:
    """The level-``level`` digit cloud, stored as group centres plus one shared offset pattern.

    Points are ``t_w + A^-a t_v`` with ``|w| = a`` and ``|v| = level - a``; the cloud is
    never materialised, which keeps distances to it exact at levels whose full cloud
    would not fit in memory.
    """

    def __init__(self, pair: SelfAffinePair, level: int, inner: int = 2, budget: int = 2_000_000,
                 workers: int = 1):
        if level < 1:
            raise InvalidParameterError("level must be >= 1")
        inner = min(inner, level)
        outer = level - inner
        n_digits = len(pair.digits)
        if n_digits ** outer > budget or n_digits ** inner > budget:
            raise ResourceError(f"level {level} splits into groups beyond the budget {budget}")
        self.pair, self.level = pair, level
        self.workers = workers
        self.heads = level_points(pair, outer) if outer else np.zeros((1, pair.d))
        tails = level_points(pair, inner)
        for _ in range(outer):
            tails = pair.solve(tails)
        lo, hi = tails.min(axis=0), tails.max(axis=0)
        centre = (lo + hi) / 2
        self.offsets = tails
        self.radius = float(np.abs(tails - centre).max())
        self.centres = self.heads + centre
        self._tree = None

    @property
    def size(self) -> int:
        return len(self.heads) * len(self.offsets)

    def group(self, idx: np.ndarray) -> np.ndarray:
        return (self.heads[idx][:, None, :] + self.offsets[None, :, :]).reshape(-1, self.heads.shape[1])

    @property
    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.centres)
        return self._tree

    def sup_distance_to(self, samples: np.ndarray, chunk: int = 256) -> float:
        """``sup`` over cloud points of the distance to ``samples``."""
        tree = cKDTree(samples)
        dc, _ = tree.query(self.centres, p=np.inf, workers=self.workers)
        upper = dc + self.radius
        order = np.argsort(-upper)
        best = 0.0
        for start in range(0, len(order), chunk):
            idx = order[start:start + chunk]
            idx = idx[upper[idx] > best]
            if len(idx) == 0:
                break
            dist, _ = tree.query(self.group(idx), p=np.inf, workers=self.workers)
            best = max(best, float(dist.max()))
        return best

    def sup_distance_from(self, samples: np.ndarray) -> float:
        """``sup`` over samples of the distance to the cloud, pruned by group bounds."""
        dc, _ = self.tree.query(samples, p=np.inf, workers=self.workers)
        lower = np.maximum(dc - self.radius, 0.0)
        # distances to the cloud points nearest the group centres bound from above
        mid = (self.offsets.min(axis=0) + self.offsets.max(axis=0)) / 2
        pivot = self.offsets[np.abs(self.offsets - mid).max(axis=1).argmin()]
        upper, _ = cKDTree(self.heads + pivot).query(samples, p=np.inf, workers=self.workers)
        order = np.argsort(-upper)
        best = float(lower.max())
        for i in order:
            if upper[i] <= best:
                break
            s = samples[i]
            near = self.tree.query_ball_point(s, upper[i] + self.radius, p=np.inf)
            pts = self.group(np.asarray(near))
            best = max(best, float(np.abs(pts - s).max(axis=1).min()))
        return best

    def hausdorff(self, samples) -> float:
        samples = _as_cloud(samples)
        if samples.shape[1] != self.heads.shape[1]:
            raise DimensionError("samples and cloud have different dimensions")
        return max(self.sup_distance_to(samples), self.sup_distance_from(samples))


# -- sampling helpers ------------------------------------------------------------------

def _interior_samples(region: Prism, n: int, rng, collar: float) -> np.ndarray:
    m = region.d - 1
    h = float(region.height)
    q = rng.uniform(-0.5 + collar, 0.5 - collar, size=(n, m))
    t = rng.uniform(collar, 1 - collar, size=n) if h > 2 * collar else rng.uniform(0, 1, size=n)
    return region.lateral_point(q, t)


def _boundary_directions(m: int, n: int, rng) -> np.ndarray:
    """Random points on the boundary of the centred unit box in R^m."""
    q = rng.uniform(-0.5, 0.5, size=(n, m))
    face = rng.integers(0, m, size=n)
    q[np.arange(n), face] = rng.choice([-0.5, 0.5], size=n)
    return q


# -- checks ---------------------------------------------------------------------------

def check_injectivity(h: IterationMap, region: Prism, pairs: int = 100_000, delta: float = 1e-3,
                      seed: int = 0, bins: int = 8) -> VerificationReport:
    """Map random pairs at separation ``>= delta`` and look for coinciding images.

    Partners sit at sup-distance between ``delta`` and ``2**bins * delta``; the minimum
    image separation is recorded per dyadic separation band.
    """
    if pairs < 1 or delta <= 0:
        raise InvalidParameterError("need pairs >= 1 and delta > 0")
    rng = np.random.default_rng(seed)
    d = region.d
    parts, have = [], 0
    while have < pairs:
        n = pairs - have + 64
        x = _interior_samples(region, n, rng, 0.0)
        band = rng.integers(0, bins, size=n)
        sep = delta * 2.0 ** (band + rng.uniform(0, 1, size=n))
        direction = rng.uniform(-1, 1, size=(n, d))
        direction[np.arange(n), rng.integers(0, d, size=n)] = rng.choice([-1.0, 1.0], size=n)
        xp = x + sep[:, None] * direction
        # partners that fall outside the prism are reflected back through x
        out = ~region.contains(xp)
        xp[out] = x[out] - sep[out, None] * direction[out]
        inside = region.contains(xp)
        parts.append((x[inside], xp[inside], band[inside], sep[inside]))
        have += int(inside.sum())
    x, xp, band, sep = (np.concatenate(c)[:pairs] for c in zip(*parts))
    hx, hxp = h(x), h(xp)
    img = np.abs(hx - hxp).max(axis=1)
    ratio = img / sep
    curve = []
    for k in range(bins):
        sel = band == k
        curve.append(float(img[sel].min()) if sel.any() else float("nan"))
    coincide = int((img <= COINCIDENCE).sum())
    return VerificationReport(
        name="injectivity",
        params={"depth": h.depth, "p": h.pair.p, "s": tuple(float(v) for v in h.pair.s), "delta": delta},
        seed=seed,
        counts={"pairs": int(len(x)), "coincidences": coincide},
        stats={"min_image_separation": float(img.min()), "min_ratio": float(ratio.min()),
               "min_separation_by_band": tuple(curve)},
        tolerance={"coincidence": COINCIDENCE},
        passed=coincide == 0,
    )


def _stabilization_index(heights: np.ndarray) -> np.ndarray:
    """Smallest ``i >= 1`` with ``heights[j] == heights[i]`` for all ``j >= i``."""
    n = heights.shape[0] - 1
    idx = np.full(heights.shape[1], n)
    same = np.ones(heights.shape[1], dtype=bool)
    for i in range(n - 1, 0, -1):
        same &= heights[i] == heights[n]
        idx[same] = i
    return np.maximum(idx, 1)


def check_height_properties(h: IterationMap, region: Prism, samples: int = 1000, seed: int = 0,
                            stabilize_by: int = 12, collar: float = 1e-3,
                            pairs: int | None = None) -> VerificationReport:
    """Height stabilization inside the prism and height-difference monotonicity on its side.

    Monotonicity is tested, for each iteration step, on pairs of side points whose
    images enter the flattening stage on one common vertical line; the flattening
    only stretches such lines.  Pairs on a common generator line of the original
    prism are also compared, and their height-difference drops are reported as a
    statistic: the squeeze moves those points apart horizontally, so the flattening
    may stretch them by different amounts.
    """
    if h.depth < 2:
        raise InvalidParameterError("need a map of depth >= 2")
    rng = np.random.default_rng(seed)
    pairs = samples if pairs is None else pairs
    m = region.d - 1

    pts = _interior_samples(region, samples, rng, collar)
    heights = np.array([t[:, -1] for t in h.trajectory(pts)])
    index = _stabilization_index(heights)
    stable_tail = index <= stabilize_by

    checked = violations = 0
    worst = 0.0
    for level in range(h.depth):
        got = 0
        for _ in range(50):
            if got >= pairs:
                break
            drop = _vertical_line_pairs(h, region, level, 4 * pairs, rng)[: pairs - got]
            got += len(drop)
            violations += int((drop > MONOTONE_SLACK).sum())
            if drop.size:
                worst = max(worst, float(drop.max()))
        checked += got

    q = _boundary_directions(m, samples, rng)
    t1, t2 = rng.uniform(0, 1, size=samples), rng.uniform(0, 1, size=samples)
    h1 = np.array([t[:, -1] for t in h.trajectory(region.lateral_point(q, t1))])
    h2 = np.array([t[:, -1] for t in h.trajectory(region.lateral_point(q, t2))])
    gap = np.abs(h1 - h2)
    generator_drops = int((gap[1:] < gap[:-1] - MONOTONE_SLACK).sum())

    return VerificationReport(
        name="height_properties",
        params={"depth": h.depth, "p": h.pair.p, "s": tuple(float(v) for v in h.pair.s),
                "collar": collar, "stabilize_by": stabilize_by},
        seed=seed,
        counts={"interior_samples": samples, "unstabilized": int((~stable_tail).sum()),
                "monotonicity_comparisons": checked, "monotonicity_violations": violations,
                "generator_line_comparisons": int(gap[1:].size), "generator_line_drops": generator_drops},
        stats={"max_stabilization_index": int(index.max()),
               "mean_stabilization_index": float(index.mean()),
               "max_height_difference_drop": worst},
        tolerance={"slack": MONOTONE_SLACK},
        passed=bool(stable_tail.all()) and violations == 0,
    )


def _on_column_side(fr, w, eta, tol):
    centre, rho = fr.paths(eta)
    off = (np.abs(w - centre) / (rho / 2)).max(axis=1)
    return np.abs(off - 1) <= tol


def _vertical_line_pairs(h: IterationMap, region: Prism, level: int, n: int, rng,
                         tol: float = 1e-9) -> np.ndarray:
    """Height-difference drops over step ``level`` for side-point pairs sharing a vertical line.

    A side point is mapped by the first ``level`` steps and then through the shear,
    squeeze and translation of its prism.  A partner on the same vertical line, still on
    the side of the translated column, is pulled back to the original prism.
    """
    m = region.d - 1
    x = region.lateral_point(_boundary_directions(m, n, rng), rng.uniform(0, 1, size=n))
    hx = h.apply_levels(x, 0, level)
    fr = h.frames(hx, level)
    eta = hx[:, -1] - fr.yb
    w = hx[:, :-1]
    for st in fr.forward_stages()[:3]:
        w, eta = st(w, eta)
    eta2 = rng.uniform(0, 1, size=n) * fr.H
    ok = _on_column_side(fr, w, eta, tol) & _on_column_side(fr, w, eta2, 1e-12)
    w2, e2 = w.copy(), eta2.copy()
    for st in fr.inverse_stages()[2::-1]:
        w2, e2 = st(w2, e2)
    hx2 = np.concatenate([w2, (fr.yb + e2)[:, None]], axis=1)
    x2 = h.apply_levels(hx2, 0, level, inverse=True)
    side = np.abs(np.abs(x2[:, :-1] - region.center_at(x2[:, -1])).max(axis=1) - 0.5) <= tol
    ok &= side & region.contains(x2, tol)
    if not ok.any():
        return np.empty(0)
    a, b = hx[ok], hx2[ok]
    before = np.abs(a[:, -1] - b[:, -1])
    after = np.abs(h._step(a, level)[:, -1] - h._step(b, level)[:, -1])
    return before - after


def check_convergence(pair: SelfAffinePair, prism: Prism, profile: PathProfile, depth: int = 4,
                      level: int = 6, samples_per_axis: int = 46, tolerance: float = 0.1,
                      budget: int = 2_000_000, workers: int = 1) -> VerificationReport:
    """Hausdorff distance between the image of a sample grid of the prism and the digit cloud."""
    if samples_per_axis ** prism.d > budget:
        raise ResourceError("sample grid exceeds the point budget")
    if profile.dim != pair.d - 1:
        raise DimensionError("profile and pair dimensions differ")
    h = compose_h(prism, pair, profile, depth)
    grid = prism.sample(samples_per_axis)
    image = h(grid)
    cloud = DigitCloud(pair, level, budget=budget, workers=workers)
    d_h = cloud.hausdorff(image)
    return VerificationReport(
        name="convergence",
        params={"depth": depth, "level": level, "p": pair.p, "s": tuple(float(v) for v in pair.s)},
        seed=None,
        counts={"samples": len(grid), "cloud_points": cloud.size},
        stats={"hausdorff": d_h},
        tolerance={"hausdorff": tolerance},
        passed=d_h <= tolerance,
    )
