"""Finite metric spaces and their hyperbolicity constants.

The four-point constant of a finite space is

    delta = max over quadruples of 1/2 * (S_1 - S_2)

where ``S_1 >= S_2 >= S_3`` are the three pairing sums
``d(x,y)+d(z,w)``, ``d(x,z)+d(y,w)``, ``d(x,w)+d(y,z)``.  Taking the two
largest pairings of an unordered 4-subset gives the same value as maximising
over all 24 orderings, so the exhaustive kernel only visits ``C(n, 4)``
subsets.
"""

from __future__ import annotations

import csv
import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    AsymmetricMatrix,
    EmptySelection,
    IndexOutOfRange,
    MetricError,
    NegativeDistance,
    NonzeroDiagonal,
    TriangleViolation,
)

TOL = 1e-9

# Above this size the kernel switches from one block per first index to one
# block per leading pair, bounding the index buffer at C(n, 2) rows.
_TRIPLE_BLOCK_LIMIT = 256


@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """An immutable n-point metric space with a designated basepoint.

    Build instances through :func:`validate_metric`; the constructor itself
    only checks shapes.
    """

    dist: np.ndarray
    labels: tuple = ()
    base: int = 0

    def __post_init__(self):
        d = np.array(self.dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise MetricError(f"distance matrix must be square, got shape {d.shape}")
        d.setflags(write=False)
        object.__setattr__(self, "dist", d)
        n = d.shape[0]
        labels = tuple(self.labels) if self.labels else tuple(range(n))
        if len(labels) != n:
            raise MetricError(f"{len(labels)} labels for {n} points")
        object.__setattr__(self, "labels", labels)
        if n and not 0 <= self.base < n:
            raise IndexOutOfRange(f"base {self.base} outside 0..{n - 1}")

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self):
        return self.n

    def distance(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def check_index(self, *idx: int) -> None:
        for i in idx:
            if not (isinstance(i, (int, np.integer)) and 0 <= i < self.n):
                raise IndexOutOfRange(f"index {i!r} outside 0..{self.n - 1}")


@dataclass(frozen=True)
class GromovTriple:
    a: float
    b: float
    c: float


@dataclass(frozen=True)
class DeltaReport:
    """Hyperbolicity constant together with the index tuple realising it.

    For the four-point constant ``witness`` is a sorted 4-subset; for the
    three-point constant it is the ordered triple ``(x, y, w)`` and ``base``
    holds the fixed point.
    """

    delta: float
    witness: tuple
    base: int | None = None


def validate_metric(dist, labels: Sequence | None = None, base: int = 0,
                    tol: float = TOL) -> FiniteMetricSpace:
    """Check the metric axioms and return a :class:`FiniteMetricSpace`.

    Raises the first violated axiom (scanning in row-major index order):
    negativity, asymmetry, nonzero diagonal, then the triangle inequality.
    Entries symmetric within ``tol`` are averaged so the stored matrix is
    exactly symmetric.
    """
    d = np.array(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise MetricError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    if not np.all(np.isfinite(d)):
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise MetricError(f"non-finite distance d[{i}][{j}]")

    bad = np.argwhere(d < 0)
    if len(bad):
        i, j = bad[0]
        raise NegativeDistance(int(i), int(j), float(d[i, j]))
    bad = np.argwhere(np.abs(d - d.T) > tol)
    if len(bad):
        i, j = bad[0]
        raise AsymmetricMatrix(int(i), int(j), float(d[i, j]), float(d[j, i]))
    bad = np.flatnonzero(np.abs(np.diag(d)) > tol)
    if len(bad):
        i = int(bad[0])
        raise NonzeroDiagonal(i, float(d[i, i]))

    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    _check_triangle(d, tol)
    return FiniteMetricSpace(d, tuple(labels) if labels is not None else (), base)


def _check_triangle(d: np.ndarray, tol: float) -> None:
    n = d.shape[0]
    # excess[k, j] = d[i, j] - d[i, k] - d[k, j] for a fixed row i
    for i in range(n):
        excess = d[i][None, :] - d[i][:, None] - d
        hits = np.argwhere(excess > tol)
        if len(hits):
            k, j = hits[0]
            raise TriangleViolation(i, int(k), int(j), float(excess[k, j]))


def gromov_product(space: FiniteMetricSpace, y: int, z: int, x: int) -> float:
    """``(y.z)_x = (d(y,x) + d(z,x) - d(y,z)) / 2``."""
    space.check_index(y, z, x)
    d = space.dist
    return 0.5 * (d[y, x] + d[z, x] - d[y, z])


def triple_decomposition(space: FiniteMetricSpace, x: int, y: int, z: int) -> GromovTriple:
    """Split the three side lengths of ``(x, y, z)`` into tripod legs."""
    return GromovTriple(
        a=gromov_product(space, y, z, x),
        b=gromov_product(space, x, z, y),
        c=gromov_product(space, x, y, z),
    )


def ordered_defect(space: FiniteMetricSpace, x: int, y: int, z: int, w: int) -> float:
    """Signed excess ``d(x,y)+d(z,w) - max{d(x,z)+d(y,w), d(x,w)+d(y,z)}``.

    Not halved; the quadruple satisfies the four-point condition with
    constant delta iff this is at most ``2*delta``.
    """
    d = space.dist
    return d[x, y] + d[z, w] - max(d[x, z] + d[y, w], d[x, w] + d[y, z])


def quadruple_defect(space: FiniteMetricSpace, quad: Sequence[int]) -> float:
    """Halved defect of an unordered quadruple (largest minus middle pairing)."""
    i, j, k, l = quad
    d = space.dist
    s = sorted((d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]))
    return (s[2] - s[1]) / 2


def _blocks(n: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]]:
    """Yield the 4-subsets of ``range(n)`` in lexicographic order, in blocks."""
    if n < 4:
        return
    if n <= _TRIPLE_BLOCK_LIMIT:
        tri = np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)
        starts = np.searchsorted(tri[:, 0], np.arange(n + 1))
        for i in range(n - 3):
            rest = tri[starts[i + 1]:]
            yield np.full(len(rest), i, dtype=np.intp), rest[:, 0], rest[:, 1], rest[:, 2]
    else:
        pairs = np.array(list(itertools.combinations(range(n), 2)), dtype=np.intp)
        starts = np.searchsorted(pairs[:, 0], np.arange(n + 1))
        for i in range(n - 3):
            for j in range(i + 1, n - 2):
                rest = pairs[starts[j + 1]:]
                m = len(rest)
                yield (np.full(m, i, dtype=np.intp), np.full(m, j, dtype=np.intp),
                       rest[:, 0], rest[:, 1])


def _block_defects(d: np.ndarray, block) -> np.ndarray:
    i, j, k, l = block
    s = np.sort(np.stack([d[i, j] + d[k, l], d[i, k] + d[j, l], d[i, l] + d[j, k]]), axis=0)
    return (s[2] - s[1]) / 2


def _block_max(d, block):
    defects = _block_defects(d, block)
    at = int(np.argmax(defects))
    return float(defects[at]), tuple(int(v[at]) for v in block)


def four_point_delta(space: FiniteMetricSpace, threads: int = 1) -> DeltaReport:
    """Least delta for which every quadruple satisfies the four-point condition.

    ``threads > 1`` spreads blocks over a thread pool; the reduction keeps the
    first maximum in lexicographic order, so the witness does not depend on
    scheduling.
    """
    n = space.n
    if n < 4:
        return DeltaReport(0.0, (0, 0, 0, 0))
    d = space.dist
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda b: _block_max(d, b), _blocks(n)))
    else:
        results = (_block_max(d, b) for b in _blocks(n))
    best, witness = -1.0, (0, 1, 2, 3)
    for value, quad in results:
        if value > best:
            best, witness = value, quad
    return DeltaReport(max(best, 0.0), witness)


def quadruple_defects(space: FiniteMetricSpace) -> tuple[np.ndarray, np.ndarray]:
    """All 4-subsets (lexicographic) and their halved defects."""
    quads, values = [], []
    for block in _blocks(space.n):
        quads.append(np.stack(block, axis=1))
        values.append(_block_defects(space.dist, block))
    if not quads:
        return np.empty((0, 4), dtype=np.intp), np.empty(0)
    return np.concatenate(quads), np.concatenate(values)


def three_point_defects(space: FiniteMetricSpace, base: int) -> np.ndarray:
    """Signed, unhalved defects ``e[x, y, w]`` of the condition at ``base``.

    ``e[x,y,w] = d(x,y) + d(w,z) - max{d(x,w)+d(y,z), d(x,z)+d(y,w)}``.
    """
    space.check_index(base)
    d = space.dist
    dz = d[:, base]
    lhs = d[:, :, None] + dz[None, None, :]
    right1 = d[:, None, :] + dz[None, :, None]
    right2 = dz[:, None, None] + d[None, :, :]
    return lhs - np.maximum(right1, right2)


def three_point_delta(space: FiniteMetricSpace, base: int | None = None) -> DeltaReport:
    """Least delta~ with ``d(x,y)+d(w,z) <= max{d(x,w)+d(y,z), d(x,z)+d(y,w)} + 2 delta~``
    for all ``x, y, w`` and ``z = base``."""
    z = space.base if base is None else base
    space.check_index(z)
    n = space.n
    d = space.dist
    dz = d[:, z]
    best, witness = 0.0, (0, 0, 0)
    for x in range(n):
        e = (d[x][:, None] + dz[None, :]
             - np.maximum(d[x][None, :] + dz[:, None], dz[x] + d))
        at = int(np.argmax(e))
        if e.flat[at] > 2 * best:
            best = e.flat[at] / 2
            witness = (x, *divmod(at, n))
    return DeltaReport(float(best), tuple(int(v) for v in witness), base=z)


def subspace_restrict(space: FiniteMetricSpace, indices: Sequence[int]) -> FiniteMetricSpace:
    """Restrict to ``indices`` (in the given order).

    The base stays the same point when selected; otherwise the first selected
    index becomes the base.
    """
    idx = list(indices)
    if not idx:
        raise EmptySelection("cannot restrict to an empty selection")
    space.check_index(*idx)
    sel = np.asarray(idx, dtype=np.intp)
    base = idx.index(space.base) if space.base in idx else 0
    return FiniteMetricSpace(space.dist[np.ix_(sel, sel)],
                             tuple(space.labels[i] for i in idx), base)


def relabel(space: FiniteMetricSpace, perm: Sequence[int]) -> FiniteMetricSpace:
    """Reorder points so that new point ``k`` is old point ``perm[k]``."""
    return subspace_restrict(space, perm)


# --- file formats ---------------------------------------------------------

def load_metric(path: str | Path) -> FiniteMetricSpace:
    """Read a CSV matrix or a JSON ``{"labels", "base", "dist"}`` document."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        doc = json.loads(text)
        return validate_metric(doc["dist"], doc.get("labels"), int(doc.get("base", 0)))
    rows = [[float(v) for v in row] for row in csv.reader(text.splitlines()) if row]
    return validate_metric(rows)


def metric_to_json(space: FiniteMetricSpace) -> dict:
    return {"labels": list(space.labels), "base": space.base, "dist": space.dist.tolist()}


def dump_metric(space: FiniteMetricSpace, path: str | Path, fmt: str = "json") -> None:
    path = Path(path)
    if fmt == "json":
        path.write_text(json.dumps(metric_to_json(space), indent=1) + "\n")
    elif fmt == "csv":
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerows([[repr(float(v)) for v in row] for row in space.dist])
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
