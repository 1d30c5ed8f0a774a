"""Rough geodesics, embedding audits, triangle thinness and almost-geodesic witnesses."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .band import AnchorKind, BandPoint, BandSpace, ProductMetricKind, band_membership
from .errors import (
    ConfigError,
    EndpointsMismatch,
    InsufficientSamples,
    MissingParameters,
    ParameterOutOfRange,
)

TOL = 1e-9
THIN_STEP = 0.05


# --- paths -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RoughPath:
    """Parameters ``t_0 <= ... <= t_m`` and the points they map to.

    ``curve``, when present, evaluates the underlying path at any parameter;
    otherwise :meth:`at` falls back to the nearest sample.
    """

    params: np.ndarray
    points: list
    k: float
    space: Any
    curve: Callable[[float], Any] | None = None

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        if len(params) != len(self.points):
            raise ValueError(f"{len(params)} parameters for {len(self.points)} points")
        if np.any(np.diff(params) < 0):
            raise ValueError("parameters must be nondecreasing")
        object.__setattr__(self, "params", params)

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(self.params[-1] - self.params[0])

    def at(self, t: float):
        lo, hi = self.params[0], self.params[-1]
        if not lo - self.k - TOL <= t <= hi + self.k + TOL:
            raise MissingParameters(f"parameter {t} outside [{lo}, {hi}]")
        if self.curve is not None:
            return self.curve(min(max(t, lo), hi))
        return self.points[int(np.argmin(np.abs(self.params - t)))]

    def reversed_at(self, t: float):
        """``gamma^{-1}(t) = gamma(t_m - t)``."""
        return self.at(self.params[-1] - t)

    def to_json(self) -> dict:
        return {"params": self.params.tolist(),
                "points": [self.space.point_to_json(p) for p in self.points], "k": self.k}


def _aligned_grid(length: float, step: float) -> np.ndarray:
    """Multiples of ``step`` measured from both ends of ``[0, length]``."""
    if length <= 0:
        return np.array([0.0])
    fwd = np.arange(0.0, length, step)
    grid = np.union1d(fwd, length - fwd)
    return np.union1d(grid, [0.0, length])


def geodesic_path(space, p, q, step: float = THIN_STEP) -> RoughPath:
    """Exact geodesic ``[p, q]`` of a model space, sampled from both ends."""
    total = space.distance(p, q)
    params = _aligned_grid(total, step)
    curve = lambda s: space.geodesic_point(p, q, s)  # noqa: E731
    points = [p] + [curve(s) for s in params[1:-1]] + [q] if len(params) > 1 else [p]
    return RoughPath(params, points, 0.0, space, curve)


@dataclass(frozen=True)
class PathAudit:
    k: float
    worst: tuple[int, int]


def rough_path_audit(path: RoughPath) -> PathAudit:
    """Least ``k`` with ``|d(p_i, p_j) - |t_i - t_j|| <= k`` for all sample pairs."""
    m = len(path.points)
    if m < 2:
        raise InsufficientSamples("a path audit needs at least two samples")
    d = path.space.pairwise(path.points, path.points)
    err = np.abs(d - np.abs(path.params[:, None] - path.params[None, :]))
    at = int(np.argmax(err))
    i, j = divmod(at, m)
    return PathAudit(float(err.flat[at]), (min(i, j), max(i, j)))


# --- embedding audit ---------------------------------------------------------

@dataclass(frozen=True)
class EmbeddingClass:
    """Fitted sandwich ``d/lam - k <= d' <= lam d + k``.

    ``tag`` is one of ``isometric``, ``rough``, ``bilipschitz``, ``quasi``;
    ``rough_k`` is the least ``k`` that works with ``lam = 1``.
    """

    lam: float
    k: float
    tag: str
    rough_k: float = 0.0
    bilipschitz_lam: float = math.inf


def _sandwich_k(src: np.ndarray, img: np.ndarray, lam: float) -> float:
    return float(max(0.0, np.max(src / lam - img), np.max(img - lam * src)))


def embedding_audit(source, image, lam_max: float = 16.0, grid: int = 400,
                    tol: float = TOL) -> EmbeddingClass:
    """Classify a sampled map from its source and image distance matrices.

    Every candidate ``lam`` (a geometric grid on ``[1, lam_max]`` plus the
    exact bilipschitz constant) gets its least ``k``; the chosen fit is the
    one with the narrowest sandwich at the sample diameter ``D``, i.e. the
    smallest ``(lam - 1/lam) D + 2k``.
    """
    src = np.asarray(getattr(source, "dist", source), dtype=float)
    img = np.asarray(getattr(image, "dist", image), dtype=float)
    if src.shape != img.shape or src.ndim != 2 or src.shape[0] < 2:
        raise InsufficientSamples("need two matching distance matrices over at least 2 points")
    iu = np.triu_indices(src.shape[0], 1)
    s, m = src[iu], img[iu]
    rough_k = float(np.max(np.abs(m - s)))

    pos = s > tol
    if np.any(~pos & (m > tol)):
        bl = math.inf
    else:
        ratios = np.concatenate([m[pos] / s[pos], s[pos] / np.maximum(m[pos], tol)])
        bl = float(np.max(ratios)) if len(ratios) else 1.0

    diam = float(np.max(s))
    lams = list(np.geomspace(1.0, lam_max, grid))
    if bl <= lam_max:
        lams.append(bl)
    best = None
    for lam in lams:
        k = 0.0 if lam == bl else _sandwich_k(s, m, lam)
        k = 0.0 if k <= tol else k
        width = (lam - 1 / lam) * diam + 2 * k
        if best is None or width < best[0] - tol:
            best = (width, lam, k)
    _, lam, k = best
    if rough_k <= tol:
        return EmbeddingClass(1.0, 0.0, "isometric", 0.0, 1.0)
    if lam == 1.0:
        tag = "rough"
    elif k == 0.0:
        tag = "bilipschitz"
    else:
        tag = "quasi"
    return EmbeddingClass(float(lam), float(k), tag, rough_k, bl)


# --- triangles -----------------------------------------------------------------

def _check_triangle_sides(sides: Sequence[RoughPath]) -> None:
    if len(sides) != 3:
        raise EndpointsMismatch("a triangle needs exactly three sides")
    space = sides[0].space
    for i, side in enumerate(sides):
        for end in (side.start, side.end):
            if not any(space.distance(end, e) <= TOL
                       for j, other in enumerate(sides) if j != i
                       for e in (other.start, other.end)):
                raise EndpointsMismatch(f"side {i} has an endpoint not shared with another side")


def thin_triangle_delta(sides: Sequence[RoughPath]) -> float:
    """Largest distance from a sample on one side to the nearest sample on the
    other two sides (over-estimates the continuous value by at most a step)."""
    _check_triangle_sides(sides)
    space = sides[0].space
    worst = 0.0
    for i, side in enumerate(sides):
        others = [p for j, s in enumerate(sides) if j != i for p in s.points]
        d = space.pairwise(side.points, others)
        worst = max(worst, float(np.max(np.min(d, axis=1))))
    return worst


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + TOL

    def to_json(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "passed": self.passed}


@dataclass(frozen=True, eq=False)
class TriangleReport:
    vertices: tuple
    sides: tuple
    delta: float
    k: float
    legs: tuple  # (a, b, c)
    internal: tuple  # (x~, y~, z~)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> list:
        return [c.to_json() for c in self.checks]


def triangle_sides(space, x, y, z, step: float = THIN_STEP) -> tuple[RoughPath, RoughPath, RoughPath]:
    """Exact geodesic sides ``(xy, xz, yz)``, each parameterised from its first vertex."""
    return geodesic_path(space, x, y, step), geodesic_path(space, x, z, step), \
        geodesic_path(space, y, z, step)


def internal_points_report(space, x, y, z, sides=None, k: float | None = None,
                           delta: float | None = None, step: float = THIN_STEP,
                           grid: int = 41) -> TriangleReport:
    """Evaluate the internal-point inequalities of a rough geodesic triangle.

    ``sides`` are ``(xy, xz, yz)``; ``k`` defaults to the largest audited
    roughness of the sides and ``delta`` to their measured thinness.
    """
    if sides is None:
        sides = triangle_sides(space, x, y, z, step)
    gxy, gxz, gyz = sides
    for side, (p, q) in zip(sides, ((x, y), (x, z), (y, z))):
        if space.distance(side.start, p) > TOL or space.distance(side.end, q) > TOL:
            raise EndpointsMismatch("sides must run x->y, x->z, y->z")
    if k is None:
        k = max((rough_path_audit(s).k for s in sides if len(s.points) > 1), default=0.0)
    if delta is None:
        delta = thin_triangle_delta(sides)

    dxy, dxz, dyz = space.distance(x, y), space.distance(x, z), space.distance(y, z)
    a = 0.5 * (dxy + dxz - dyz)
    b = 0.5 * (dxy + dyz - dxz)
    c = 0.5 * (dxz + dyz - dxy)
    xt, yt, zt = gyz.at(b), gxz.at(a), gxy.at(a)
    near = 2 * delta + 4 * k
    far = 4 * delta + 15 * k

    checks = [
        BoundCheck("d(z, z~) <= c + 2delta + 4k", space.distance(z, zt), c + near),
        BoundCheck("d(y, y~) <= b + 2delta + 4k", space.distance(y, yt), b + near),
        BoundCheck("d(x, x~) <= a + 2delta + 4k", space.distance(x, xt), a + near),
    ]
    # corner fellow-travelling: both sides leaving a vertex, up to its leg length
    corners = (("x", gxy.at, gxz.at, a), ("y", lambda t: gxy.reversed_at(t), gyz.at, b),
               ("z", lambda t: gxz.reversed_at(t), lambda t: gyz.reversed_at(t), c))
    for name, first, second, leg in corners:
        ts = np.linspace(0.0, max(leg, 0.0), grid)
        gap = max(space.distance(first(t), second(t)) for t in ts)
        checks.append(BoundCheck(f"corner {name}: d(g1(t), g2(t)) <= 4delta + 15k up to the leg", gap, far))
    for (n1, p1), (n2, p2) in (((("x~", xt), ("y~", yt))), ((("x~", xt), ("z~", zt))),
                               ((("y~", yt), ("z~", zt)))):
        checks.append(BoundCheck(f"d({n1}, {n2}) <= 4delta + 15k", space.distance(p1, p2), far))
    for name, side, fwd, back in (("xy", gxy, a, b), ("xz", gxz, a, c), ("yz", gyz, b, c)):
        checks.append(BoundCheck(f"d(g_{name}({fwd:.6g}), g_{name}^-1({back:.6g})) <= 2k",
                                 space.distance(side.at(fwd), side.reversed_at(back)), 2 * k))
    return TriangleReport((x, y, z), tuple(sides), delta, k, (a, b, c), (xt, yt, zt), checks)


def measure_thinness(space, seed: int, triangles: int = 5, radius: float = 8.0,
                     step: float = THIN_STEP) -> float:
    """Largest thinness over random triangles with vertices within ``radius`` of the base."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(triangles):
        verts = [space.radial_point(float(rng.uniform(0, radius)), int(rng.integers(0, 2 ** 62)))
                 for _ in range(3)]
        worst = max(worst, thin_triangle_delta(triangle_sides(space, *verts, step)))
    return worst


# --- almost-geodesic witnesses in the band ----------------------------------------

@dataclass(frozen=True)
class Witness:
    point: BandPoint
    case: str  # "a" (w = x), "b" (w = y), "c" (from x), "c-mirror" (from y)
    swapped: bool
    source: BandPoint
    level: float | None = None


def _anchor_point(band: BandSpace, which: int, p, level: float):
    """Point on the anchor geodesic through ``p`` at anchor value ``level``."""
    f = band.factors[which]
    if band.anchor is AnchorKind.RADIAL:
        r = f.distance(f.base, p)
        return f.geodesic_point(f.base, p, min(max(level, 0.0), r))
    b = f.busemann_exact(p)
    return f.toward_ideal(p, min(level, b))


def construct_witness(band: BandSpace, x: BandPoint, y: BandPoint, t: float) -> Witness:
    if band.metric is not ProductMetricKind.MAX:
        raise ConfigError("almost-geodesic witnesses are built for the max product metric")
    d1, d2 = band.factor_distances(x, y)
    d = max(d1, d2)
    if not -TOL <= t <= d + TOL:
        raise ParameterOutOfRange(f"t = {t} outside [0, {d}]")
    if t <= band.delta:
        return Witness(x, "a", False, x)
    if t >= d - band.delta:
        return Witness(y, "b", False, y)

    swapped = d2 > d1
    order = (1, 0) if swapped else (0, 1)
    first, second = order
    coord = lambda p, i: p.p1 if i == 0 else p.p2  # noqa: E731
    hx = band.anchor_value(first, coord(x, first))
    hy = band.anchor_value(first, coord(y, first))
    a1 = 0.5 * (d + hx - hy)
    if t <= a1:
        src, tt, case = x, t, "c"
    else:
        src, tt, case = y, d - t, "c-mirror"
    level = band.anchor_value(first, coord(src, first)) - tt
    w = [None, None]
    for i in order:
        w[i] = _anchor_point(band, i, coord(src, i), level)
    return Witness(BandPoint(w[0], w[1]), case, swapped, src, level)


def almost_geodesic_witness(band: BandSpace, x: BandPoint, y: BandPoint, t: float) -> BandPoint:
    """A band point roughly at distance ``t`` from ``x`` and ``d(x,y) - t`` from ``y``.

    Cases: ``t <= delta`` gives ``x``; ``t >= d(x,y) - delta`` gives ``y``;
    otherwise, with the factor realising ``d(x,y)`` placed first, both factor
    coordinates of ``x`` slide along their anchor geodesics to the common
    anchor value ``h1(x1) - t`` when ``t`` is at most the Gromov-product leg
    at ``x``, and the mirrored construction from ``y`` is used beyond it.
    """
    return construct_witness(band, x, y, t).point


def rough_geodesic_between(band: BandSpace, x: BandPoint, y: BandPoint,
                           step: float) -> RoughPath:
    """Path of witnesses at parameters ``0, step, 2 step, ..., d(x, y)``."""
    if not step > 0:
        raise ParameterOutOfRange("step must be positive")
    d = band.distance(x, y)
    params = np.arange(0.0, d, step) if d > 0 else np.array([0.0])
    if d > 0:
        params = np.append(params, d)
    points = [almost_geodesic_witness(band, x, y, float(t)) for t in params]
    points[0], points[-1] = x, y
    curve = lambda t: almost_geodesic_witness(band, x, y, t)  # noqa: E731
    k = rough_path_audit(RoughPath(params, points, 0.0, band)).k if len(points) > 1 else 0.0
    return RoughPath(params, points, k, band, curve)


@dataclass
class GeodesicAudit:
    k_emp: float
    k_theory: float
    factor_thinness: float
    worst: tuple | None = None  # (pair index, t, error)
    # max of d2(w2, src2) - d1(w1, src1) - Delta - 4k: how far the second factor lags
    lag_max_excess: float = -math.inf
    factor1_max_error: float = 0.0
    witnesses: int = 0
    membership_min_slack: float = math.inf
    cases: dict = field(default_factory=dict)


def almost_geodesic_audit(band: BandSpace, pairs: Sequence[tuple[BandPoint, BandPoint]],
                          t_grid_density: int = 10, factor_thinness: float | None = None,
                          roughness: float = 0.0, thinness_seed: int = 0) -> GeodesicAudit:
    """Worst deviation of witnesses from the almost-geodesic inequalities.

    ``K_emp`` is the max over pairs and ``t_grid_density`` evenly spaced
    ``t`` in ``[0, d(x,y)]`` of ``max(|d(x,w) - t|, |d(y,w) - (d(x,y) - t)|)``.
    ``K_theory = 2k + delta' + Delta + 4k`` with ``delta' = 4 delta~ + 30k``,
    where ``delta~`` is the measured triangle thinness of the factors.
    """
    if not pairs:
        raise InsufficientSamples("audit needs at least one pair")
    if factor_thinness is None:
        factor_thinness = max(measure_thinness(f, thinness_seed) for f in band.factors)
    k = roughness
    audit = GeodesicAudit(0.0, 2 * k + (4 * factor_thinness + 30 * k) + band.delta + 4 * k,
                          factor_thinness)
    for idx, (x, y) in enumerate(pairs):
        d = band.distance(x, y)
        for t in np.linspace(0.0, d, t_grid_density):
            t = float(t)
            wit = construct_witness(band, x, y, t)
            w = wit.point
            err = max(abs(band.distance(x, w) - t), abs(band.distance(y, w) - (d - t)))
            if err > audit.k_emp:
                audit.k_emp, audit.worst = err, (idx, t, err)
            audit.witnesses += 1
            audit.cases[wit.case] = audit.cases.get(wit.case, 0) + 1
            audit.membership_min_slack = min(audit.membership_min_slack,
                                             band_membership(band, w.p1, w.p2).slack)
            if wit.case.startswith("c"):
                first, second = (1, 0) if wit.swapped else (0, 1)
                src = wit.source
                c = lambda p, i: p.p1 if i == 0 else p.p2  # noqa: E731
                dw1 = band.factors[first].distance(c(w, first), c(src, first))
                dw2 = band.factors[second].distance(c(w, second), c(src, second))
                audit.lag_max_excess = max(audit.lag_max_excess, dw2 - dw1 - band.delta - 4 * k)
                target = t if wit.case == "c" else d - t
                audit.factor1_max_error = max(audit.factor1_max_error, abs(dw1 - target))
    return audit
