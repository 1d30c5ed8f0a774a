import math

import numpy as np
import pytest

from bandlab.band import BandPoint, BandSpace, band_membership, sample_band
from bandlab.errors import (
    EndpointsMismatch,
    InsufficientSamples,
    MissingParameters,
    ParameterOutOfRange,
)
from bandlab.models import H2Model, TreeModel
from bandlab.rough import (
    RoughPath,
    almost_geodesic_audit,
    almost_geodesic_witness,
    construct_witness,
    embedding_audit,
    geodesic_path,
    internal_points_report,
    rough_geodesic_between,
    rough_path_audit,
    thin_triangle_delta,
    triangle_sides,
)
from bandlab.tree import TreePoint, path_tree, random_tree, tripod


@pytest.fixture(scope="module")
def tree():
    return TreeModel(random_tree(60, 1, depth_bias=0.6))


def line_matrix(xs):
    xs = np.asarray(xs, dtype=float)
    return np.abs(xs[:, None] - xs[None, :])


# --- paths and embeddings -------------------------------------------------------------

def test_exact_geodesic_audits_to_zero():
    h = H2Model()
    p, q = h.radial_point(3.0, 1), h.radial_point(6.0, 2)
    path = geodesic_path(h, p, q, step=h.distance(p, q) / 19)
    assert len(path.points) >= 20
    assert rough_path_audit(path).k <= 1e-9


def test_stalled_path_has_large_k():
    h = H2Model()
    path = RoughPath(np.linspace(0, 10, 11), [h.base] * 11, 0.0, h)
    audit = rough_path_audit(path)
    assert audit.k >= 10
    assert audit.worst == (0, 10)


def test_path_audit_needs_two_points():
    h = H2Model()
    with pytest.raises(InsufficientSamples):
        rough_path_audit(RoughPath([0.0], [h.base], 0.0, h))


def test_embedding_identity_is_isometric():
    d = line_matrix([0, 1, 3, 7])
    cls = embedding_audit(d, d)
    assert (cls.tag, cls.lam, cls.k) == ("isometric", 1.0, 0.0)


def test_embedding_doubling_is_bilipschitz():
    d = line_matrix([0, 1, 3, 7])
    cls = embedding_audit(d, 2 * d)
    assert cls.tag == "bilipschitz"
    assert cls.lam == pytest.approx(2.0)
    assert cls.k == 0.0


def test_embedding_jitter_is_rough():
    rng = np.random.default_rng(0)
    xs = np.arange(0.0, 20.0)
    d = line_matrix(xs)
    img = line_matrix(xs + rng.uniform(-0.1, 0.1, len(xs)))
    cls = embedding_audit(d, img)
    assert cls.tag == "rough"
    assert cls.lam == 1.0
    assert cls.k <= 0.2
    assert cls.rough_k == pytest.approx(np.max(np.abs(img - d)))


def test_embedding_needs_samples():
    with pytest.raises(InsufficientSamples):
        embedding_audit(np.zeros((1, 1)), np.zeros((1, 1)))


# --- triangles ----------------------------------------------------------------------------

def test_degenerate_line_triangle():
    m = TreeModel(path_tree([1.0] * 6))
    x, y, z = TreePoint(0), TreePoint(6), TreePoint(2)
    sides = triangle_sides(m, x, y, z)
    assert thin_triangle_delta(sides) <= 1e-12
    rep = internal_points_report(m, x, y, z)
    assert rep.legs[2] == pytest.approx(0.0)
    assert m.distance(rep.internal[2], z) <= 1e-12


def test_tripod_triangle():
    m = TreeModel(tripod((2, 3, 4)))
    x, y, z = TreePoint("A"), TreePoint("B"), TreePoint("C")
    rep = internal_points_report(m, x, y, z)
    assert rep.delta <= 1e-12
    assert rep.k <= 1e-12
    assert rep.passed
    pts = rep.internal
    assert max(m.distance(p, q) for p in pts for q in pts) <= 1e-12
    assert m.distance(z, pts[2]) == pytest.approx(rep.legs[2], abs=1e-12)


def test_large_h2_triangle_thinness():
    h = H2Model()
    verts = [h.radial_point(10.0, s) for s in (1, 2, 3)]
    sides = triangle_sides(h, *verts)
    assert min(s.length for s in sides) > 10
    assert thin_triangle_delta(sides) <= 1.1


def test_h2_triangle_ledger():
    h = H2Model()
    rep = internal_points_report(h, h.radial_point(4, 5), h.radial_point(5, 6), h.radial_point(2, 7))
    assert rep.passed
    names = [c.name for c in rep.checks]
    assert len(names) == 12 and len(set(names)) == 12
    assert all({"name", "lhs", "rhs", "passed"} <= set(e) for e in rep.to_json())


def test_triangle_endpoint_mismatch():
    h = H2Model()
    a, b, c, d = (h.radial_point(3, s) for s in range(4))
    sides = (geodesic_path(h, a, b), geodesic_path(h, a, c), geodesic_path(h, b, d))
    with pytest.raises(EndpointsMismatch):
        thin_triangle_delta(sides)
    with pytest.raises(EndpointsMismatch):
        internal_points_report(h, a, b, c, sides=sides)


def test_sample_only_path_needs_parameters_in_range():
    h = H2Model()
    path = RoughPath([0.0, 1.0], [h.base, h.radial_point(1.0, 0)], 0.0, h)
    assert path.at(0.4) == h.base
    with pytest.raises(MissingParameters):
        path.at(3.0)


# --- witnesses -----------------------------------------------------------------------------

def test_t_zero_gives_x(tree):
    band = BandSpace(tree, tree, 0.0)
    x, y = sample_band(band, 3, 20.0, 1)[1:]
    assert almost_geodesic_witness(band, x, y, 0.0) == x


def test_t_out_of_range(tree):
    band = BandSpace(tree, tree, 1.0)
    x, y = sample_band(band, 3, 20.0, 1)[1:]
    with pytest.raises(ParameterOutOfRange):
        almost_geodesic_witness(band, x, y, band.distance(x, y) + 1)


def test_diagonal_tree_band_is_isometric(tree):
    band = BandSpace(tree, tree, 0.0)
    p, q = tree.radial_point(12.0, 3), tree.radial_point(9.0, 8)
    x, y = BandPoint(p, p), BandPoint(q, q)
    d = band.distance(x, y)
    for t in np.linspace(0, d, 25):
        w = almost_geodesic_witness(band, x, y, float(t))
        assert band.distance(x, w) == pytest.approx(t, abs=1e-9)
    path = rough_geodesic_between(band, x, y, 0.5)
    assert path.k <= 1e-9
    assert path.start == x and path.end == y


def test_single_point_path(tree):
    band = BandSpace(tree, tree, 1.0)
    x = sample_band(band, 2, 10.0, 0)[1]
    path = rough_geodesic_between(band, x, x, 0.1)
    assert len(path.points) == 1 and path.k == 0.0


@pytest.mark.parametrize("anchor", ["radial", "busemann"])
def test_witness_invariants_on_h2(anchor):
    h = H2Model()
    band = BandSpace(h, h, 1.0, anchor)
    pts = sample_band(band, 21, 20.0, 2)
    for x, y in zip(pts[1::2], pts[2::2]):
        d = band.distance(x, y)
        for t in np.linspace(0, d, 9):
            wit = construct_witness(band, x, y, float(t))
            w = wit.point
            assert band_membership(band, w.p1, w.p2).inside
            if wit.case in ("a", "b"):
                assert band.distance(x, w) <= t + 2 * band.delta + 1e-9
                assert abs(band.distance(y, w) - (d - t)) <= 2 * band.delta + 1e-9
            else:
                first, second = (1, 0) if wit.swapped else (0, 1)
                coord = lambda p, i: p.p1 if i == 0 else p.p2  # noqa: E731
                src = wit.source
                d1 = band.factors[first].distance(coord(w, first), coord(src, first))
                d2 = band.factors[second].distance(coord(w, second), coord(src, second))
                assert d2 <= d1 + band.delta + 1e-9
                target = t if wit.case == "c" else d - t
                assert d1 == pytest.approx(target, abs=1e-9)


def test_h2_geodesic_between_is_rough_within_bound():
    h = H2Model()
    band = BandSpace(h, h, 1.0)
    x = BandPoint(h.radial_point(10.0, 1), h.radial_point(10.5, 2))
    y = BandPoint(h.radial_point(10.0, 3), h.radial_point(9.7, 4))
    assert band.distance(x, y) > 15
    path = rough_geodesic_between(band, x, y, 0.25)
    audit = almost_geodesic_audit(band, [(x, y)], 10)
    assert math.isfinite(path.k)
    assert path.k <= 2 * audit.k_theory


def test_audit_tree_band(tree):
    band = BandSpace(tree, tree, 2.0)
    pts = sample_band(band, 41, tree.max_radius, 5)
    audit = almost_geodesic_audit(band, list(zip(pts[1::2], pts[2::2])), 10, factor_thinness=0.0)
    assert audit.k_emp <= 6
    assert audit.k_theory == 2.0
    assert audit.lag_max_excess <= 1e-9
    assert audit.factor1_max_error <= 1e-9
    assert audit.membership_min_slack >= -1e-9
