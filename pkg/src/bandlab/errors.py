"""Exception hierarchy shared by all bandlab modules."""


class BandlabError(Exception):
    """Base class for every error raised by bandlab."""


class MetricError(BandlabError, ValueError):
    """A distance matrix violates one of the metric axioms."""


class NegativeDistance(MetricError):
    def __init__(self, i, j, value):
        super().__init__(f"negative distance d[{i}][{j}] = {value!r}")
        self.indices = (i, j)
        self.value = value


class AsymmetricMatrix(MetricError):
    def __init__(self, i, j, a, b):
        super().__init__(f"d[{i}][{j}] = {a!r} but d[{j}][{i}] = {b!r}")
        self.indices = (i, j)


class NonzeroDiagonal(MetricError):
    def __init__(self, i, value):
        super().__init__(f"diagonal entry d[{i}][{i}] = {value!r} is not zero")
        self.indices = (i,)


class TriangleViolation(MetricError):
    """``d[i][j] > d[i][k] + d[k][j]``; ``indices`` is ``(i, k, j)``."""

    def __init__(self, i, k, j, excess):
        super().__init__(
            f"triangle inequality fails for d[{i}][{j}] via {k} (excess {excess:.3e})"
        )
        self.indices = (i, k, j)
        self.excess = excess


class IndexOutOfRange(BandlabError, IndexError):
    pass


class EmptySelection(BandlabError, ValueError):
    pass


class PointOutsideDomain(BandlabError, ValueError):
    pass


class ParameterOutOfRange(BandlabError, ValueError):
    pass


class RadiusExceedsTree(BandlabError, ValueError):
    pass


class MembershipViolation(BandlabError, ValueError):
    pass


class InsufficientSamples(BandlabError, ValueError):
    pass


class EndpointsMismatch(BandlabError, ValueError):
    pass


class MissingParameters(BandlabError, ValueError):
    pass


class LengthMismatch(BandlabError, ValueError):
    pass


class WindowTooLarge(BandlabError, ValueError):
    pass


class ConfigError(BandlabError, ValueError):
    pass
