"""Gromov hyperbolicity of bands in products of hyperbolic spaces.

Exact model spaces (the hyperbolic plane and metric trees), the band of
pairs whose anchor values differ by at most ``delta``, exhaustive
four-point and three-point hyperbolicity constants, rough-geodesic
witnesses, and finite probes of the boundary at infinity.
"""

from .band import (
    AnchorKind,
    BandPoint,
    BandSpace,
    ProductMetricKind,
    band_from_spec,
    band_membership,
    counterexample_family,
    materialize,
    product_distance,
    sample_band,
)
from .boundary import PointSequence, ProbeVerdict, class_probe, tail_gromov_min
from .errors import BandlabError
from .h2 import H2Point
from .metric import (
    DeltaReport,
    FiniteMetricSpace,
    four_point_delta,
    gromov_product,
    three_point_delta,
    triple_decomposition,
    validate_metric,
)
from .models import H2Model, Ray, TreeModel, busemann, model_from_spec
from .rough import (
    EmbeddingClass,
    RoughPath,
    almost_geodesic_audit,
    almost_geodesic_witness,
    embedding_audit,
    internal_points_report,
    rough_geodesic_between,
    rough_path_audit,
    thin_triangle_delta,
)
from .tree import MetricTree, TreePoint

__version__ = "0.1.0"
