"""The band ``Y_Delta`` inside a product of two model spaces.

A pair ``(p1, p2)`` lies in the band when its two anchor values differ by at
most ``delta``.  Anchors are either the distance to the factor basepoint
(``radial``) or the Busemann function of the factor's designated ray
(``busemann``).  The band is metrised by the max or the Euclidean product
metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, NamedTuple, Sequence

import numpy as np

from .errors import ConfigError, MembershipViolation
from .h2 import H2Point
from .metric import FiniteMetricSpace, validate_metric
from .models import H2Model, model_from_spec

MEMBERSHIP_TOL = 1e-9


class AnchorKind(str, Enum):
    RADIAL = "radial"
    BUSEMANN = "busemann"


class ProductMetricKind(str, Enum):
    MAX = "max"
    EUCLIDEAN = "euclidean"


@dataclass(frozen=True)
class BandPoint:
    p1: Any
    p2: Any


class Membership(NamedTuple):
    inside: bool
    slack: float


@dataclass(frozen=True, eq=False)
class BandSpace:
    factor1: Any
    factor2: Any
    delta: float = 0.0
    anchor: AnchorKind = AnchorKind.RADIAL
    metric: ProductMetricKind = ProductMetricKind.MAX

    def __post_init__(self):
        if not self.delta >= 0:
            raise ConfigError(f"band width must be nonnegative, got {self.delta}")
        object.__setattr__(self, "anchor", AnchorKind(self.anchor))
        object.__setattr__(self, "metric", ProductMetricKind(self.metric))

    @property
    def factors(self):
        return self.factor1, self.factor2

    @property
    def base(self) -> BandPoint:
        """``(z1, z2)``, which for Busemann anchors is ``(gamma1(0), gamma2(0))``."""
        return BandPoint(self.factor1.base, self.factor2.base)

    def check(self, p: BandPoint) -> BandPoint:
        require_member(self, p)
        return p

    def anchor_value(self, which: int, p) -> float:
        f = self.factors[which]
        if self.anchor is AnchorKind.RADIAL:
            return f.distance(p, f.base)
        return f.busemann_exact(p)

    def anchors(self, p: BandPoint) -> tuple[float, float]:
        return self.anchor_value(0, p.p1), self.anchor_value(1, p.p2)

    def combine(self, d1, d2):
        if self.metric is ProductMetricKind.MAX:
            return np.maximum(d1, d2)
        return np.hypot(d1, d2)

    def factor_distances(self, p: BandPoint, q: BandPoint) -> tuple[float, float]:
        return self.factor1.distance(p.p1, q.p1), self.factor2.distance(p.p2, q.p2)

    def distance(self, p: BandPoint, q: BandPoint) -> float:
        """Product distance without membership checks."""
        return float(self.combine(*self.factor_distances(p, q)))

    def pairwise(self, ps: Sequence[BandPoint], qs: Sequence[BandPoint]) -> np.ndarray:
        d1 = self.factor1.pairwise([p.p1 for p in ps], [q.p1 for q in qs])
        d2 = self.factor2.pairwise([p.p2 for p in ps], [q.p2 for q in qs])
        return self.combine(d1, d2)

    def spec(self) -> dict:
        return {"factor1": self.factor1.spec(), "factor2": self.factor2.spec(),
                "delta": self.delta, "anchor": self.anchor.value, "metric": self.metric.value}

    def point_to_json(self, p: BandPoint):
        return [self.factor1.point_to_json(p.p1), self.factor2.point_to_json(p.p2)]

    def point_from_json(self, obj) -> BandPoint:
        a, b = obj
        return BandPoint(self.factor1.point_from_json(a), self.factor2.point_from_json(b))


def band_from_spec(spec: dict) -> BandSpace:
    try:
        return BandSpace(model_from_spec(spec["factor1"]), model_from_spec(spec["factor2"]),
                         float(spec.get("delta", 0.0)), spec.get("anchor", "radial"),
                         spec.get("metric", "max"))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad band spec: {exc}") from exc


def band_membership(band: BandSpace, p1, p2) -> Membership:
    """Whether ``|h1(p1) - h2(p2)| <= delta``, with slack ``delta - |h1 - h2|``."""
    h1 = band.anchor_value(0, band.factor1.check(p1))
    h2_ = band.anchor_value(1, band.factor2.check(p2))
    slack = band.delta - abs(h1 - h2_)
    return Membership(slack >= -MEMBERSHIP_TOL, slack)


def require_member(band: BandSpace, p: BandPoint) -> None:
    inside, slack = band_membership(band, p.p1, p.p2)
    if not inside:
        raise MembershipViolation(f"{p} misses the band by {-slack:.3e}")


def product_distance(band: BandSpace, p: BandPoint, q: BandPoint) -> float:
    require_member(band, p)
    require_member(band, q)
    return band.distance(p, q)


def sample_band(band: BandSpace, n: int, radius_cap: float, seed: int,
                diagonal: bool = False) -> list[BandPoint]:
    """``n`` band points; point 0 is the base pair.

    Radial anchors: a common radius ``r`` uniform on ``[0, radius_cap]``
    (capped by the factor radii), factor radii jittered independently within
    ``delta/2`` of it and clipped to the same interval.  Busemann
    anchors: a common level uniform on ``[-radius_cap/2, radius_cap/2]``
    (intersected with the levels both factors reach), jittered the same way,
    each factor point placed on its horosphere with a lateral offset of at
    most ``radius_cap/2``.  With ``diagonal`` both factors share radius (or
    level) and direction seed, so identical factors give points ``(p, p)``.
    """
    if n < 1:
        raise ConfigError("sample size must be at least 1")
    if not radius_cap > 0:
        raise ConfigError("radius cap must be positive")
    rng = np.random.default_rng(seed)
    half = band.delta / 2
    points = [band.base]
    if band.anchor is AnchorKind.RADIAL:
        top = min(radius_cap, band.factor1.max_radius, band.factor2.max_radius)
        for _ in range(n - 1):
            r = rng.uniform(0.0, top)
            r1, r2 = np.clip(rng.uniform(r - half, r + half, size=2), 0.0, top)
            s1, s2 = (int(v) for v in rng.integers(0, 2 ** 62, size=2))
            if diagonal:
                s2, r2 = s1, r1
            points.append(BandPoint(band.factor1.radial_point(float(r1), s1),
                                    band.factor2.radial_point(float(r2), s2)))
        return points

    lo = max(band.factor1.level_range()[0], band.factor2.level_range()[0], -radius_cap / 2)
    hi = min(band.factor1.level_range()[1], band.factor2.level_range()[1], radius_cap / 2)
    if lo + half > hi - half:
        raise ConfigError(f"no common Busemann levels in [{lo}, {hi}] for width {band.delta}")
    for _ in range(n - 1):
        level = rng.uniform(lo + half, hi - half)
        l1, l2 = level + rng.uniform(-half, half, size=2)
        s1, s2 = (int(v) for v in rng.integers(0, 2 ** 62, size=2))
        if diagonal:
            s2, l2 = s1, l1
        points.append(BandPoint(band.factor1.horosphere_point(float(l1), s1, radius_cap / 2),
                                band.factor2.horosphere_point(float(l2), s2, radius_cap / 2)))
    return points


def materialize(band: BandSpace, points: Sequence[BandPoint]) -> FiniteMetricSpace:
    """Product-distance matrix of band points (base index 0)."""
    for p in points:
        require_member(band, p)
    return validate_metric(band.pairwise(points, points), base=0)


def factor_sample(band: BandSpace, points: Sequence[BandPoint], which: int) -> FiniteMetricSpace:
    """The factor coordinates of ``points`` with the factor basepoint at index 0."""
    f = band.factors[which]
    coords = [p.p1 if which == 0 else p.p2 for p in points]
    if not coords or coords[0] != f.base:
        coords = [f.base] + coords
    return validate_metric(f.pairwise(coords, coords), base=0)


def horocycle_half_width(d1: float, tol: float = 1e-12) -> float:
    """``s`` with ``d((-s, 1), (s, 1)) = d1``, by bisection on the exact distance."""
    if d1 <= 0:
        return 0.0
    dist = lambda s: 2 * math.asinh(s)  # noqa: E731  distance between (-s,1) and (s,1)
    lo, hi = 0.0, 1.0
    while dist(hi) < d1:
        hi *= 2
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if dist(mid) < d1:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def counterexample_family(band: BandSpace, d1: float) -> tuple[BandPoint, BandPoint, BandPoint, BandPoint]:
    """Quadruple ``(x, y, z, w)`` showing the Euclidean product band is not hyperbolic.

    In each factor ``y`` and ``z`` sit on the horocycle through the base at
    distance ``d1``; ``x`` is their midpoint on both factors and
    ``w = (y1, z2)``.  All four points have equal Busemann values.
    """
    f1, f2 = band.factors
    if not (isinstance(f1, H2Model) and isinstance(f2, H2Model)) or band.anchor is not AnchorKind.BUSEMANN:
        raise ConfigError("the counterexample needs an H2 x H2 band with Busemann anchors")
    if (f1.base.x, f1.base.y) != (f2.base.x, f2.base.y):
        raise ConfigError("the counterexample needs both factors based at the same point")
    x0, y0 = f1.base.x, f1.base.y
    s = horocycle_half_width(d1)
    if s == 0:
        p = f1.base
        return (BandPoint(p, p),) * 4
    ya, za = H2Point(x0 - s * y0, y0), H2Point(x0 + s * y0, y0)
    mid = H2Point(x0, y0 * math.sqrt(1 + s * s))
    x, y, z, w = BandPoint(mid, mid), BandPoint(ya, ya), BandPoint(za, za), BandPoint(ya, za)
    for p in (x, y, z, w):
        require_member(band, p)
    return x, y, z, w
