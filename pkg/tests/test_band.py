import math

import numpy as np
import pytest

from bandlab.band import (
    BandPoint,
    BandSpace,
    band_from_spec,
    band_membership,
    counterexample_family,
    factor_sample,
    horocycle_half_width,
    materialize,
    product_distance,
    sample_band,
)
from bandlab.errors import ConfigError, MembershipViolation
from bandlab.h2 import H2Point, distance
from bandlab.metric import ordered_defect, four_point_delta, three_point_delta, validate_metric
from bandlab.models import H2Model, TreeModel
from bandlab.tree import TreePoint, path_tree, random_tree


@pytest.fixture(scope="module")
def tree():
    return TreeModel(random_tree(60, 1, depth_bias=0.6))


@pytest.fixture(scope="module")
def line():
    # 0 - 1 - ... - 10 with unit edges, rooted at 0
    return TreeModel(path_tree([1.0] * 10))


def test_base_pair_is_a_member(tree):
    for delta in (0.0, 0.5, 3.0):
        band = BandSpace(tree, tree, delta)
        assert band_membership(band, tree.base, tree.base) == (True, delta)


def test_membership_slack_is_signed(line):
    band = BandSpace(line, line, 1.0)
    inside, slack = band_membership(band, TreePoint(5), TreePoint(7))
    assert not inside
    assert slack == pytest.approx(-1.0)


def test_busemann_membership_on_h2():
    h = H2Model()
    band = BandSpace(h, h, 0.7, "busemann")
    inside, slack = band_membership(band, H2Point(0, 2), H2Point(0, 2))
    assert inside and slack == pytest.approx(0.7)


def test_membership_symmetric_under_factor_swap(tree):
    h = H2Model()
    band = BandSpace(tree, h, 1.0)
    swapped = BandSpace(h, tree, 1.0)
    p, q = tree.radial_point(3.0, 1), h.radial_point(3.4, 2)
    assert band_membership(band, p, q).slack == pytest.approx(band_membership(swapped, q, p).slack)


def test_product_distance_kinds(line):
    mx = BandSpace(line, line, 10.0)
    eu = BandSpace(line, line, 10.0, metric="euclidean")
    p, q = BandPoint(TreePoint(0), TreePoint(0)), BandPoint(TreePoint(3), TreePoint(4))
    assert product_distance(mx, p, q) == 4.0
    assert product_distance(eu, p, q) == 5.0
    assert product_distance(mx, p, p) == 0.0


def test_product_distance_rejects_non_members(line):
    band = BandSpace(line, line, 1.0)
    with pytest.raises(MembershipViolation):
        product_distance(band, band.base, BandPoint(TreePoint(2), TreePoint(8)))


def test_max_and_euclidean_are_bilipschitz(tree):
    mx = BandSpace(tree, tree, 2.0)
    eu = BandSpace(tree, tree, 2.0, metric="euclidean")
    pts = sample_band(mx, 15, 20.0, 3)
    dm, de = mx.pairwise(pts, pts), eu.pairwise(pts, pts)
    assert np.all(dm <= de + 1e-12)
    assert np.all(de <= math.sqrt(2) * dm + 1e-12)


def test_sampling_contract(tree):
    band = BandSpace(tree, tree, 1.0)
    assert sample_band(band, 1, 10.0, 0) == [band.base]
    pts = sample_band(band, 25, 30.0, 9)
    assert len(pts) == 25
    assert all(band_membership(band, p.p1, p.p2).inside for p in pts)
    assert pts == sample_band(band, 25, 30.0, 9)


def test_busemann_sampling_members():
    h = H2Model()
    band = BandSpace(h, h, 1.0, "busemann")
    pts = sample_band(band, 30, 20.0, 4)
    assert all(band_membership(band, p.p1, p.p2).inside for p in pts)
    assert pts[0] == band.base


def test_diagonal_sampling_repeats_factor_point(tree):
    band = BandSpace(tree, tree, 0.0)
    assert all(p.p1 == p.p2 for p in sample_band(band, 10, 15.0, 2, diagonal=True))


def test_materialize_examples(line):
    band = BandSpace(line, line, 10.0)
    assert materialize(band, [band.base]).dist.tolist() == [[0.0]]
    two = materialize(band, [band.base, BandPoint(TreePoint(3), TreePoint(4))])
    assert two.dist[0, 1] == 4.0


def test_tree_band_delta_within_width(tree):
    for delta in (0.0, 1.0, 2.0):
        band = BandSpace(tree, tree, delta)
        space = materialize(band, sample_band(band, 20, 25.0, 1))
        assert four_point_delta(space).delta <= delta + 1e-8


def test_factor_sample_includes_base(tree):
    band = BandSpace(tree, tree, 1.0)
    pts = sample_band(band, 8, 10.0, 5)[1:]
    f = factor_sample(band, pts, 1)
    assert f.n == 8 and f.base == 0


def test_radial_chain_bound_per_quadruple():
    h = H2Model()
    band = BandSpace(h, h, 1.0)
    pts = sample_band(band, 14, 10.0, 6)
    space = materialize(band, pts)
    tilde = max(three_point_delta(factor_sample(band, pts, i), 0).delta for i in (0, 1))
    assert four_point_delta(space).delta <= 2 * tilde + 1.0 + 1e-8


def test_band_from_spec():
    band = band_from_spec({"factor1": {"kind": "h2"}, "factor2": {"kind": "h2"}, "delta": 2,
                           "anchor": "busemann", "metric": "euclidean"})
    assert band.delta == 2.0 and band.anchor.value == "busemann"
    assert band_from_spec(band.spec()).spec() == band.spec()
    with pytest.raises(ConfigError):
        band_from_spec({"factor1": {"kind": "h2"}})
    with pytest.raises(ConfigError):
        BandSpace(H2Model(), H2Model(), -1.0)


# --- Euclidean product counterexample ------------------------------------------------

def test_horocycle_half_width():
    for d1 in (0.5, 5.0, 20.0):
        s = horocycle_half_width(d1)
        assert distance(H2Point(-s, 1), H2Point(s, 1)) == pytest.approx(d1, abs=1e-9)


@pytest.mark.parametrize("d1", [5.0, 10.0, 20.0])
def test_counterexample_quadruple(d1):
    h = H2Model()
    band = BandSpace(h, h, 0.0, "busemann")
    euclid = BandSpace(h, h, 0.0, "busemann", "euclidean")
    x, y, z, w = quad = counterexample_family(band, d1)
    assert distance(x.p1, y.p1) == pytest.approx(distance(y.p1, z.p1) / 2, abs=1e-9)
    assert distance(x.p1, z.p1) == pytest.approx(distance(y.p1, z.p1) / 2, abs=1e-9)
    assert w == BandPoint(y.p1, z.p2)
    de = validate_metric(euclid.pairwise(quad, quad))
    dm = validate_metric(band.pairwise(quad, quad))
    assert ordered_defect(de, 1, 2, 0, 3) == pytest.approx((math.sqrt(2) - 1) * d1, abs=1e-6)
    assert ordered_defect(dm, 1, 2, 0, 3) <= 1e-9


def test_counterexample_degenerate():
    h = H2Model()
    band = BandSpace(h, h, 0.0, "busemann")
    quad = counterexample_family(band, 0.0)
    assert len(set(quad)) == 1


def test_counterexample_requires_h2_busemann(tree):
    with pytest.raises(ConfigError):
        counterexample_family(BandSpace(tree, tree, 0.0, "busemann"), 5.0)
    with pytest.raises(ConfigError):
        counterexample_family(BandSpace(H2Model(), H2Model(), 0.0), 5.0)
