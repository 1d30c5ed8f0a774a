"""The hyperbolic plane in the upper half-plane model.

Points are stored by their half-plane coordinates ``(x, y)``.  Points made by
radial sampling additionally carry geodesic polar coordinates ``(r, theta)``
about ``i = (0, 1)``: ``theta`` is the direction of the initial tangent at
``i``, measured counterclockwise from the positive real axis (``pi/2`` is
straight up the vertical ray).  Double precision cannot resolve nearby
half-plane points close to the boundary (at radius 40, ``y`` is about
``1e-18``), while the polar form keeps distances between radially placed
points exact to rounding.  Whenever both points carry polar coordinates the
polar formulas are used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterOutOfRange, PointOutsideDomain

MIN_Y = 1e-12
GEODESIC_TOL = 1e-9

# splitmix64 constants (Steele, Lea & Flood)
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def splitmix64(seed: int) -> int:
    z = (int(seed) + _GOLDEN) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def seed_to_unit(seed: int) -> float:
    """Map an integer seed to a float in ``[0, 1)`` via splitmix64."""
    return (splitmix64(seed) >> 11) * 2.0 ** -53


@dataclass(frozen=True)
class H2Point:
    x: float
    y: float
    polar: tuple[float, float] | None = None

    def __post_init__(self):
        if self.polar is None:
            if not (math.isfinite(self.x) and math.isfinite(self.y)) or self.y <= MIN_Y:
                raise PointOutsideDomain(f"({self.x}, {self.y}) is not in the upper half-plane "
                                         f"(need y > {MIN_Y})")
        elif not self.y > 0:
            raise PointOutsideDomain(f"polar point {self.polar} underflows the half-plane chart")

    @classmethod
    def from_polar(cls, r: float, theta: float) -> "H2Point":
        if r < 0:
            raise ParameterOutOfRange(f"negative radius {r}")
        theta = math.remainder(theta, 2 * math.pi)
        phi = theta - math.pi / 2
        a, b = math.cos(phi / 2), math.sin(phi / 2)
        # image of i*e^r under the rotation about i by phi
        e = math.exp(-r)
        den = a * a * e + b * b / e
        return cls(a * b * (e - 1 / e) / den, 1.0 / den, (float(r), theta))

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


ORIGIN = H2Point(0.0, 1.0, (0.0, math.pi / 2))


def _polar_of(p: H2Point) -> tuple[float, float]:
    if p.polar is not None:
        return p.polar
    r = distance(ORIGIN, p)
    if r == 0:
        return 0.0, math.pi / 2
    if p.x == 0:
        return r, math.pi / 2 if p.y > 1 else -math.pi / 2
    c = (p.x * p.x + p.y * p.y - 1) / (2 * p.x)
    s = math.copysign(1.0, p.x)
    return r, math.atan2(s * c, s)


def distance(p: H2Point, q: H2Point) -> float:
    """Hyperbolic distance ``acosh(1 + |p-q|^2 / (2 p.y q.y))``, evaluated as
    ``2 asinh(|p-q| / (2 sqrt(p.y q.y)))`` to avoid cancellation."""
    if p.polar is not None and q.polar is not None:
        (r1, t1), (r2, t2) = p.polar, q.polar
        h = math.sinh((r1 - r2) / 2) ** 2 + math.sinh(r1) * math.sinh(r2) * math.sin((t1 - t2) / 2) ** 2
        return 2 * math.asinh(math.sqrt(h))
    if p == q:
        return 0.0
    chord = math.hypot(p.x - q.x, p.y - q.y)
    return 2 * math.asinh(chord / (2 * math.sqrt(p.y * q.y)))


def pairwise(ps, qs) -> np.ndarray:
    """Distance matrix between two point lists (vectorised)."""
    if all(p.polar is not None for p in ps) and all(q.polar is not None for q in qs):
        a = np.array([p.polar for p in ps], dtype=float).reshape(-1, 2)
        b = np.array([q.polar for q in qs], dtype=float).reshape(-1, 2)
        r1, t1 = a[:, 0][:, None], a[:, 1][:, None]
        r2, t2 = b[:, 0][None, :], b[:, 1][None, :]
        h = np.sinh((r1 - r2) / 2) ** 2 + np.sinh(r1) * np.sinh(r2) * np.sin((t1 - t2) / 2) ** 2
        return 2 * np.arcsinh(np.sqrt(h))
    a = np.array([(p.x, p.y) for p in ps], dtype=float).reshape(-1, 2)
    b = np.array([(q.x, q.y) for q in qs], dtype=float).reshape(-1, 2)
    chord = np.hypot(a[:, 0][:, None] - b[:, 0][None, :], a[:, 1][:, None] - b[:, 1][None, :])
    return 2 * np.arcsinh(chord / (2 * np.sqrt(a[:, 1][:, None] * b[:, 1][None, :])))


def _rotate_about_i(z: complex, phi: float) -> complex:
    a, b = math.cos(phi / 2), math.sin(phi / 2)
    return (a * z + b) / (-b * z + a)


def _direction_at_i(q: complex) -> float:
    """Angle of the unit tangent at ``i`` pointing along the geodesic to ``q``."""
    u, v = q.real, q.imag
    if u == 0:
        return math.pi / 2 if v >= 1 else -math.pi / 2
    c = (u * u + v * v - 1) / (2 * u)
    s = math.copysign(1.0, u)
    return math.atan2(s * c, s)


def exp_map(p: H2Point, theta: float, s: float) -> H2Point:
    """Point at distance ``s`` from ``p`` in the direction of angle ``theta``."""
    if p.polar is not None and p.polar[0] == 0.0:
        return H2Point.from_polar(s, theta)
    w = _rotate_about_i(complex(0.0, math.exp(s)), theta - math.pi / 2)
    return H2Point(p.x + p.y * w.real, p.y * w.imag)


def direction(p: H2Point, q: H2Point) -> float:
    """Direction angle at ``p`` of the geodesic toward ``q``."""
    if p.polar is not None and q.polar is not None and p.polar[0] == 0.0:
        return q.polar[1]
    return _direction_at_i(complex((q.x - p.x) / p.y, q.y / p.y))


def geodesic_point(p: H2Point, q: H2Point, s: float) -> H2Point:
    """Point at distance ``s`` from ``p`` on the geodesic segment ``[p, q]``."""
    total = distance(p, q)
    if not -GEODESIC_TOL <= s <= total + GEODESIC_TOL:
        raise ParameterOutOfRange(f"s = {s} outside [0, {total}]")
    s = min(max(s, 0.0), total)
    if s == 0:
        return p
    if s == total:
        return q
    if p.polar is not None and q.polar is not None:
        (r1, t1), (r2, t2) = p.polar, q.polar
        if r1 == 0:
            return H2Point.from_polar(s, t2)
        if r2 == 0:
            return H2Point.from_polar(r1 - s, t1)
        if t1 == t2:
            return H2Point.from_polar(r1 + s if r2 > r1 else r1 - s, t1)
    return exp_map(p, direction(p, q), s)


def busemann_vertical(base: H2Point, p: H2Point) -> float:
    """Closed-form Busemann function of the upward vertical ray from ``base``:
    ``B(p) = log(base.y) - log(p.y)``."""
    return _log_y(base) - _log_y(p)


def _log_y(p: H2Point) -> float:
    if p.polar is not None:
        r, theta = p.polar
        phi = theta - math.pi / 2
        # y = 1 / (cosh r - sinh r cos phi), rewritten without cancellation
        return -math.log(math.exp(-r) + 2 * math.sinh(r) * math.sin(phi / 2) ** 2)
    return math.log(p.y)


def vertical_point(base: H2Point, t: float) -> H2Point:
    """``gamma(t) = (base.x, base.y e^t)``; exact polar form when base is ``i``."""
    if base.polar is not None and base.polar[0] == 0.0:
        if t >= 0:
            return H2Point.from_polar(t, math.pi / 2)
        return H2Point.from_polar(-t, -math.pi / 2)
    return H2Point(base.x, base.y * math.exp(t))


def horocycle_point(base: H2Point, level: float, shift: float) -> H2Point:
    """Point at Busemann level ``level`` displaced along the horocycle by
    Euclidean-normalised amount ``shift`` (horocyclic arc length)."""
    y = base.y * math.exp(-level)
    return H2Point(base.x + shift * y, y)


def toward_ideal(base: H2Point, p: H2Point, level: float) -> H2Point:
    """Point on the vertical geodesic through ``p`` with Busemann value ``level``.

    This is the geodesic from ``p`` toward the ideal point of the vertical
    ray; ``level`` must not exceed ``B(p)``.
    """
    if p.x == base.x and base.polar is not None and base.polar[0] == 0.0:
        return vertical_point(base, -level)
    return H2Point(p.x, base.y * math.exp(-level))
