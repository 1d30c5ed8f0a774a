"""Finite weighted metric trees and points on their edges."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np

from .errors import ParameterOutOfRange, PointOutsideDomain, RadiusExceedsTree

TREE_TOL = 1e-12


@dataclass(frozen=True)
class TreePoint:
    """A point ``offset`` above ``node`` on the edge toward its parent.

    ``offset == 0`` is the node itself.
    """

    node: Hashable
    offset: float = 0.0


class MetricTree:
    """A rooted tree with positive edge lengths.

    ``edges`` is a sequence of ``(u, v, length)``; orientation is irrelevant,
    the tree is re-rooted at ``root``.
    """

    def __init__(self, edges: Iterable[Sequence], root: Hashable):
        adj: dict = {}
        count = 0
        for u, v, length in edges:
            length = float(length)
            if not length > 0 or not math.isfinite(length):
                raise ValueError(f"edge ({u}, {v}) has non-positive length {length}")
            adj.setdefault(u, []).append((v, length))
            adj.setdefault(v, []).append((u, length))
            count += 1
        if not adj:
            adj[root] = []
        if root not in adj:
            raise ValueError(f"root {root!r} is not a node")
        if count != len(adj) - 1:
            raise ValueError("edge list does not describe a tree")

        self.root = root
        self.parent = {root: None}
        self.length = {root: 0.0}
        self.depth = {root: 0.0}
        self.children: dict = {root: []}
        self.order = [root]
        stack = [root]
        while stack:
            u = stack.pop()
            for v, length in adj[u]:
                if v in self.parent:
                    continue
                self.parent[v] = u
                self.length[v] = length
                self.depth[v] = self.depth[u] + length
                self.children[v] = []
                self.children[u].append(v)
                self.order.append(v)
                stack.append(v)
        if len(self.order) != len(adj):
            raise ValueError("edge list is not connected")
        self.edges = [(u, v, l) for u, vs in adj.items() for v, l in vs if self.parent.get(v) == u]
        self.leaves = [v for v in self.order if not self.children[v] and v != root] or [root]

    # --- points -----------------------------------------------------------

    def check(self, p: TreePoint) -> TreePoint:
        if p.node not in self.parent:
            raise PointOutsideDomain(f"unknown node {p.node!r}")
        if not -TREE_TOL <= p.offset <= self.length[p.node] + TREE_TOL:
            raise PointOutsideDomain(
                f"offset {p.offset} outside edge above {p.node!r} (length {self.length[p.node]})")
        return p

    def point_on_edge(self, u, v, offset_from_u: float) -> TreePoint:
        """Canonical point at ``offset_from_u`` along the edge ``u``-``v``."""
        if self.parent.get(v) == u:
            child, up = v, self.length[v] - offset_from_u
        elif self.parent.get(u) == v:
            child, up = u, offset_from_u
        else:
            raise PointOutsideDomain(f"({u!r}, {v!r}) is not an edge")
        return self.canonical(self.check(TreePoint(child, up)))

    def canonical(self, p: TreePoint) -> TreePoint:
        if p.node != self.root and p.offset >= self.length[p.node]:
            return TreePoint(self.parent[p.node], 0.0)
        if p.offset <= 0:
            return TreePoint(p.node, 0.0)
        return p

    def point_depth(self, p: TreePoint) -> float:
        return self.depth[p.node] - p.offset

    def ancestors(self, v) -> list:
        out = []
        while v is not None:
            out.append(v)
            v = self.parent[v]
        return out

    def lca(self, u, v):
        seen = set(self.ancestors(u))
        while v not in seen:
            v = self.parent[v]
        return v

    def at_depth(self, v, target: float) -> TreePoint:
        """Point at depth ``target`` on the path from ``v`` up to the root."""
        if target > self.depth[v] + TREE_TOL or target < -TREE_TOL:
            raise ParameterOutOfRange(f"depth {target} not above node {v!r}")
        while v != self.root and self.depth[self.parent[v]] >= target:
            v = self.parent[v]
        return self.canonical(TreePoint(v, max(self.depth[v] - target, 0.0)))

    def _meet_depth(self, p: TreePoint, q: TreePoint) -> float:
        dp, dq = self.point_depth(p), self.point_depth(q)
        if p.node == q.node:
            return min(dp, dq)
        a = self.lca(p.node, q.node)
        if a == q.node:
            return dq
        if a == p.node:
            return dp
        return self.depth[a]

    def distance(self, p: TreePoint, q: TreePoint) -> float:
        m = self._meet_depth(p, q)
        return (self.point_depth(p) - m) + (self.point_depth(q) - m)

    @cached_property
    def _index(self) -> dict:
        return {v: i for i, v in enumerate(self.order)}

    @cached_property
    def _lca_depth(self) -> np.ndarray:
        """Depth of the lowest common ancestor for every pair of nodes."""
        n = len(self.order)
        idx = self._index
        below = np.zeros((n, n), dtype=bool)  # below[v, a]: a is v or an ancestor of v
        for v in self.order:
            i = idx[v]
            if v != self.root:
                below[i] = below[idx[self.parent[v]]]
            below[i, i] = True
        out = np.zeros((n, n))
        for v in self.order[1:]:
            # parents precede children in ``order``, so the parent's row is final
            i = idx[v]
            out[i] = out[idx[self.parent[v]]]
            out[i, below[:, i]] = self.depth[v]
        return out

    def pairwise(self, ps: Sequence[TreePoint], qs: Sequence[TreePoint]) -> np.ndarray:
        """Distance matrix, using ``meet = min(depth p, depth q, depth lca)``."""
        idx = self._index
        ip = np.array([idx[p.node] for p in ps], dtype=int)
        iq = np.array([idx[q.node] for q in qs], dtype=int)
        dp = np.array([self.point_depth(p) for p in ps], dtype=float)
        dq = np.array([self.point_depth(q) for q in qs], dtype=float)
        meet = np.minimum(np.minimum.outer(dp, dq), self._lca_depth[np.ix_(ip, iq)])
        return dp[:, None] + dq[None, :] - 2 * meet

    def geodesic_point(self, p: TreePoint, q: TreePoint, s: float) -> TreePoint:
        m = self._meet_depth(p, q)
        up = self.point_depth(p) - m
        total = up + self.point_depth(q) - m
        if not -TREE_TOL <= s <= total + TREE_TOL:
            raise ParameterOutOfRange(f"s = {s} outside [0, {total}]")
        if s <= up:
            return self.at_depth(p.node, self.point_depth(p) - s)
        return self.at_depth(q.node, m + (s - up))

    def eccentricity(self) -> float:
        return max(self.depth.values())

    def radial_point(self, r: float, pick: int) -> TreePoint:
        """A point at distance ``r`` from the root, below leaf ``pick`` (mod count)."""
        if r < 0:
            raise ParameterOutOfRange(f"negative radius {r}")
        candidates = [v for v in self.leaves if self.depth[v] >= r - TREE_TOL]
        if not candidates:
            raise RadiusExceedsTree(f"radius {r} exceeds tree height {self.eccentricity()}")
        leaf = candidates[pick % len(candidates)]
        return self.at_depth(leaf, min(r, self.depth[leaf]))

    # --- designated ray ---------------------------------------------------

    def deepest_leaf(self):
        return max(self.leaves, key=lambda v: (self.depth[v], -self.order.index(v)))

    def path_to(self, leaf) -> list:
        return self.ancestors(leaf)[::-1]


def random_tree(nodes: int, seed: int, min_edge: float = 0.5, max_edge: float = 2.0,
                depth_bias: float = 0.0) -> MetricTree:
    """Random recursive tree on ``nodes`` vertices labelled ``0..nodes-1``.

    Each new vertex attaches to an earlier vertex; ``depth_bias`` in
    ``[0, 1)`` is the probability of attaching to the most recent vertex,
    which stretches the tree.
    """
    rng = random.Random(seed)
    edges = []
    for v in range(1, nodes):
        u = v - 1 if rng.random() < depth_bias else rng.randrange(v)
        edges.append((u, v, round(rng.uniform(min_edge, max_edge), 6)))
    return MetricTree(edges, 0)


def tripod(legs: Sequence[float] = (2.0, 3.0, 4.0)) -> MetricTree:
    """Star tree with center ``"o"`` and leaves ``"A"``, ``"B"``, ... ."""
    names = "ABCDEFGH"
    return MetricTree([("o", names[i], l) for i, l in enumerate(legs)], "o")


def path_tree(lengths: Sequence[float], root_index: int = 0) -> MetricTree:
    """A path ``0 - 1 - ... - m`` with the given edge lengths, rooted at ``root_index``."""
    return MetricTree([(i, i + 1, l) for i, l in enumerate(lengths)], root_index)
