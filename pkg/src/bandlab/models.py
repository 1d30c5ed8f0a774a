"""Model spaces: exact metric oracles with geodesics, rays and Busemann functions.

Two kinds are provided, :class:`H2Model` (the upper half-plane) and
:class:`TreeModel` (a finite metric tree).  Both expose the same surface so
the band construction can treat them interchangeably.  Each model has a
basepoint ``z`` and a designated geodesic ray ``gamma`` with ``gamma(0) = z``:
the upward vertical ray for H2, and a maximal root-to-leaf path for trees.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from . import h2
from .errors import ConfigError, ParameterOutOfRange, PointOutsideDomain
from .h2 import H2Point, seed_to_unit, splitmix64
from .metric import FiniteMetricSpace, validate_metric
from .tree import MetricTree, TreePoint, random_tree

BUSEMANN_STEP = 0.25
BUSEMANN_TMAX = 40.0


class H2Model:
    kind = "h2"

    def __init__(self, base: H2Point = h2.ORIGIN):
        if base.polar is None and base.x == 0.0 and base.y == 1.0:
            base = h2.ORIGIN
        self.base = base

    def __repr__(self):
        return f"H2Model(base=({self.base.x}, {self.base.y}))"

    def check(self, p) -> H2Point:
        if not isinstance(p, H2Point):
            raise PointOutsideDomain(f"{p!r} is not an H2 point")
        return p

    def distance(self, p, q) -> float:
        return h2.distance(self.check(p), self.check(q))

    def pairwise(self, ps, qs) -> np.ndarray:
        return h2.pairwise(ps, qs)

    def geodesic_point(self, p, q, s: float) -> H2Point:
        return h2.geodesic_point(self.check(p), self.check(q), s)

    def radial_point(self, r: float, seed: int) -> H2Point:
        if r < 0:
            raise ParameterOutOfRange(f"negative radius {r}")
        theta = 2 * math.pi * seed_to_unit(seed)
        return h2.exp_map(self.base, theta, r)

    ray_length = math.inf
    max_radius = math.inf

    def ray_point(self, t: float) -> H2Point:
        return h2.vertical_point(self.base, t)

    def busemann_exact(self, p) -> float:
        return h2.busemann_vertical(self.base, self.check(p))

    def level_range(self) -> tuple[float, float]:
        return -math.inf, math.inf

    def toward_ideal(self, p, level: float) -> H2Point:
        """Point on the geodesic from ``p`` to the ray's ideal point at Busemann ``level``."""
        return h2.toward_ideal(self.base, self.check(p), level)

    def horosphere_point(self, level: float, seed: int, spread: float) -> H2Point:
        """A point with Busemann value ``level``, displaced along the horocycle
        by a chord of hyperbolic length uniform in ``[0, spread]``."""
        u = seed_to_unit(seed)
        rho = spread * abs(2 * u - 1)
        shift = math.copysign(2 * math.sinh(rho / 2), u - 0.5)
        return h2.horocycle_point(self.base, level, shift)

    def spec(self) -> dict:
        return {"kind": "h2", "base": [self.base.x, self.base.y]}

    def point_to_json(self, p: H2Point):
        if p.polar is not None:
            return {"r": p.polar[0], "theta": p.polar[1]}
        return [p.x, p.y]

    def point_from_json(self, obj) -> H2Point:
        if isinstance(obj, dict):
            return H2Point.from_polar(float(obj["r"]), float(obj["theta"]))
        x, y = obj
        return H2Point(float(x), float(y))


class TreeModel:
    kind = "tree"

    def __init__(self, tree: MetricTree, ray_leaf=None):
        self.tree = tree
        self.base = TreePoint(tree.root, 0.0)
        self.ray_leaf = tree.deepest_leaf() if ray_leaf is None else ray_leaf
        if self.ray_leaf not in tree.parent:
            raise ConfigError(f"ray leaf {self.ray_leaf!r} is not a node")
        self.ray_nodes = set(tree.path_to(self.ray_leaf))
        self.ray_length = tree.depth[self.ray_leaf]
        self.max_radius = tree.eccentricity()
        self._spec_extra: dict = {}

    def __repr__(self):
        return f"TreeModel(nodes={len(self.tree.order)}, root={self.tree.root!r})"

    def check(self, p) -> TreePoint:
        if not isinstance(p, TreePoint):
            raise PointOutsideDomain(f"{p!r} is not a tree point")
        return self.tree.check(p)

    def distance(self, p, q) -> float:
        return self.tree.distance(self.check(p), self.check(q))

    def pairwise(self, ps, qs) -> np.ndarray:
        for p in (*ps, *qs):
            self.check(p)
        return self.tree.pairwise(ps, qs)

    def geodesic_point(self, p, q, s: float) -> TreePoint:
        return self.tree.geodesic_point(self.check(p), self.check(q), s)

    def radial_point(self, r: float, seed: int) -> TreePoint:
        return self.tree.radial_point(r, splitmix64(seed))

    def ray_point(self, t: float) -> TreePoint:
        if not -1e-12 <= t <= self.ray_length + 1e-12:
            raise ParameterOutOfRange(f"t = {t} outside the ray [0, {self.ray_length}]")
        return self.tree.at_depth(self.ray_leaf, min(max(t, 0.0), self.ray_length))

    def projection(self, p: TreePoint) -> tuple[float, float]:
        """``(s_p, q)``: ray parameter of the nearest ray point and distance to it."""
        p = self.check(p)
        t = self.tree
        if p.node in self.ray_nodes:
            return t.point_depth(p), 0.0
        v = p.node
        while v not in self.ray_nodes:
            v = t.parent[v]
        return t.depth[v], t.point_depth(p) - t.depth[v]

    def busemann_exact(self, p) -> float:
        s, q = self.projection(p)
        return q - s

    def level_range(self) -> tuple[float, float]:
        top = max(self.busemann_exact(TreePoint(v, 0.0)) for v in self.tree.order)
        return -self.ray_length, top

    def toward_ideal(self, p, level: float) -> TreePoint:
        b = self.busemann_exact(p)
        lo = -self.ray_length
        if not lo - 1e-12 <= level <= b + 1e-12:
            raise ParameterOutOfRange(f"level {level} outside [{lo}, {b}]")
        end = TreePoint(self.ray_leaf, 0.0)
        return self.tree.geodesic_point(p, end, min(max(b - level, 0.0), b - lo))

    def horosphere(self, level: float) -> list[TreePoint]:
        """All points with Busemann value ``level``, in node order."""
        t = self.tree
        out: list[TreePoint] = []
        if abs(level) <= 1e-12:
            out.append(TreePoint(t.root, 0.0))
        for c in t.order[1:]:
            par = t.parent[c]
            if c in self.ray_nodes:
                lo, hi = -t.depth[c], -t.depth[par]
                depth = -level
            else:
                v = par
                while v not in self.ray_nodes:
                    v = t.parent[v]
                lo, hi = t.depth[par] - 2 * t.depth[v], t.depth[c] - 2 * t.depth[v]
                depth = level + 2 * t.depth[v]
            if lo - 1e-12 <= level <= hi + 1e-12:
                p = t.canonical(TreePoint(c, min(max(t.depth[c] - depth, 0.0), t.length[c])))
                if p not in out:
                    out.append(p)
        return out

    def horosphere_point(self, level: float, seed: int, spread: float) -> TreePoint:
        pts = self.horosphere(level)
        if not pts:
            raise ParameterOutOfRange(f"no tree point at Busemann level {level}")
        near = [p for p in pts if self.distance(p, self.base) <= abs(level) + 2 * spread + 1e-12]
        pts = near or pts
        return pts[splitmix64(seed) % len(pts)]

    def spec(self) -> dict:
        if self._spec_extra:
            return dict(self._spec_extra)
        return {"kind": "tree", "edges": [[u, v, l] for u, v, l in self.tree.edges],
                "root": self.tree.root, "ray_leaf": self.ray_leaf}

    def point_to_json(self, p: TreePoint):
        return [p.node, p.offset]

    def point_from_json(self, obj) -> TreePoint:
        if isinstance(obj, list) and len(obj) == 2 and isinstance(obj[1], (int, float)) \
                and obj[0] in self.tree.parent:
            return self.check(TreePoint(obj[0], float(obj[1])))
        return self.check(TreePoint(obj, 0.0))


ModelSpace = Any  # H2Model | TreeModel


@dataclass(frozen=True)
class Ray:
    """The designated geodesic ray of ``space``, evaluated on ``[0, t_max]``."""

    space: Any
    t_max: float = BUSEMANN_TMAX

    def __post_init__(self):
        if not self.t_max > 0:
            raise ParameterOutOfRange(f"t_max must be positive, got {self.t_max}")

    @property
    def end(self) -> float:
        return min(self.t_max, self.space.ray_length)

    def __call__(self, t: float):
        return self.space.ray_point(t)


@dataclass(frozen=True)
class BusemannValue:
    value: float
    # decrease of d(p, gamma(t)) - t over the final grid step; ~0 once converged
    last_decrement: float


def model_distance(space, p, q) -> float:
    return space.distance(p, q)


def model_geodesic_point(space, p, q, s: float):
    return space.geodesic_point(p, q, s)


def radial_point(space, r: float, direction_seed: int):
    return space.radial_point(r, direction_seed)


def busemann_profile(space, ray: Ray, p, step: float = BUSEMANN_STEP) -> BusemannValue:
    end = ray.end
    grid = np.arange(0.0, end, step)
    if not len(grid) or grid[-1] < end:
        grid = np.append(grid, end)
    values = np.array([space.distance(p, ray(t)) - t for t in grid])
    dec = float(values[-2] - values[-1]) if len(values) > 1 else 0.0
    return BusemannValue(float(values.min()), dec)


def busemann(space, ray: Ray, p, step: float = BUSEMANN_STEP) -> float:
    """Truncated Busemann function: ``min`` of ``d(p, gamma(t)) - t`` over the
    grid ``0, step, 2 step, ..., T_max``.

    For exact geodesic rays the sequence is non-increasing, so this
    approaches the limit from above.
    """
    return busemann_profile(space, ray, p, step).value


def materialize_points(space, points, base: int = 0, labels=None) -> FiniteMetricSpace:
    """Distance matrix of ``points`` as a validated finite metric space."""
    d = space.pairwise(points, points)
    return validate_metric(d, labels, base)


def model_from_spec(spec: dict):
    """Build a model from its JSON description.

    ``{"kind": "h2", "base": [x, y]}``,
    ``{"kind": "tree", "edges": [[u, v, len], ...], "root": u, "ray_leaf": leaf}``, or
    ``{"kind": "tree", "random": {"nodes": N, "seed": s, ...}}``.
    """
    kind = spec.get("kind")
    if kind == "h2":
        x, y = spec.get("base", [0.0, 1.0])
        return H2Model(H2Point(float(x), float(y)))
    if kind == "tree":
        if "random" in spec:
            opts = dict(spec["random"])
            model = TreeModel(random_tree(int(opts.pop("nodes")), int(opts.pop("seed", 0)), **opts))
            model._spec_extra = dict(spec)
            return model
        tree = MetricTree(spec["edges"], spec["root"])
        return TreeModel(tree, spec.get("ray_leaf"))
    raise ConfigError(f"unknown model kind {kind!r}")


def load_tree(path: str | Path) -> TreeModel:
    """Tree file: ``{"edges": [[u, v, length], ...], "root": u}`` (optional ``"ray_leaf"``)."""
    data = json.loads(Path(path).read_text())
    return model_from_spec({"kind": "tree", **data})


def load_h2_points(path: str | Path) -> list[H2Point]:
    """CSV rows ``x,y``; a non-numeric first row is taken as a header."""
    points = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            try:
                x, y = (float(v) for v in row)
            except ValueError:
                if i == 0:
                    continue
                raise
            points.append(H2Point(x, y))
    return points
