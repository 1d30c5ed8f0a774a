import math

import pytest

from bandlab.band import BandPoint, BandSpace
from bandlab.boundary import (
    CONVERGES,
    DIVERGES,
    PointSequence,
    ProbeVerdict,
    class_probe,
    descending_sequence,
    tail_gromov_min,
)
from bandlab.errors import LengthMismatch, WindowTooLarge
from bandlab.h2 import H2Point
from bandlab.models import H2Model, TreeModel
from bandlab.tree import TreePoint, path_tree


@pytest.fixture(scope="module")
def line():
    # -30 ... 0 ... 30 as a path tree rooted at the middle
    return TreeModel(path_tree([1.0] * 60, root_index=30))


def ray(line, sign, length=30):
    return PointSequence(line, [TreePoint(30 + sign * i) for i in range(1, length + 1)])


def test_ray_tail_grows(line):
    seq = ray(line, +1)
    assert tail_gromov_min(seq, seq, window=5) >= 25


def test_opposite_rays_have_zero_product(line):
    assert tail_gromov_min(ray(line, +1), ray(line, -1), window=5) == 0.0


def test_symmetric_and_window_monotone(line):
    a, b = ray(line, +1), ray(line, -1)
    assert tail_gromov_min(a, b, window=7) == tail_gromov_min(b, a, window=7)
    assert tail_gromov_min(a, a, window=10) <= tail_gromov_min(a, a, window=5)


def test_distinct_descending_rays_plateau():
    h = H2Model()
    short = [PointSequence(h, descending_sequence(h, x, 30, 0.45)) for x in (0.0, 4.0)]
    long = [PointSequence(h, descending_sequence(h, x, 60, 0.45)) for x in (0.0, 4.0)]
    a, b = tail_gromov_min(*short, window=5), tail_gromov_min(*long, window=5)
    assert a == pytest.approx(b, abs=1e-3)
    assert a < 2


def test_upward_vertical_rays_share_their_ideal_point():
    # vertical rays at different x both tend to the point at infinity
    h = H2Model()
    a = PointSequence(h, [H2Point(0.0, math.exp(t)) for t in range(30)])
    b = PointSequence(h, [H2Point(4.0, math.exp(t)) for t in range(30)])
    assert tail_gromov_min(a, b, window=5) > 20


def test_errors(line):
    with pytest.raises(LengthMismatch):
        tail_gromov_min(ray(line, 1, 10), ray(line, 1, 12), window=3)
    with pytest.raises(WindowTooLarge):
        tail_gromov_min(ray(line, 1, 4), ray(line, 1, 4), window=5)


def test_class_probe_examples(line):
    r = ray(line, +1)
    v1, v2, eq = class_probe(r, r, window=5, threshold=20)
    assert (v1.verdict, v2.verdict, eq) == (CONVERGES, CONVERGES, True)
    still = PointSequence(line, [TreePoint(30)] * 30)
    v1, v2, eq = class_probe(r, still, window=5, threshold=20)
    assert (v1.verdict, v2.verdict, eq) == (CONVERGES, DIVERGES, False)


def test_band_diagonals_to_distinct_points_are_not_equivalent():
    h = H2Model()
    band = BandSpace(h, h, 1.0, "busemann")
    seqs = [PointSequence(band, [BandPoint(p, p) for p in descending_sequence(h, x, 60, 0.45)])
            for x in (0.0, 4.0)]
    v1, v2, eq = class_probe(*seqs, window=10, threshold=20)
    assert v1.converges and v2.converges
    assert not eq


def test_radial_band_paired_rays_grow(line):
    band = BandSpace(line, line, 0.0)
    values = []
    for length in (10, 20, 30):
        pts = [BandPoint(TreePoint(30 + i), TreePoint(30 - i)) for i in range(1, length + 1)]
        seq = PointSequence(band, pts)
        values.append(tail_gromov_min(seq, seq, window=5))
    assert values[0] < values[1] < values[2]


def test_verdict_must_match_value():
    assert ProbeVerdict.judge(25.0, 10, 20.0).converges
    with pytest.raises(ValueError):
        ProbeVerdict(5.0, CONVERGES, 10, 20.0)
