"""Finite-sequence probes of convergence to infinity and sequence equivalence.

A sequence converges to infinity when its Gromov products ``(x^i . x^j)_z``
grow without bound, and two such sequences are equivalent when their cross
products do.  Neither limit is visible in finite data, so the probes use the
minimum over the last ``window`` indices and compare it with a threshold.
Verdicts always carry the window and threshold that produced them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .errors import ConfigError, EmptySelection, LengthMismatch, WindowTooLarge
from .h2 import H2Point

DEFAULT_WINDOW = 10
DEFAULT_THRESHOLD = 20.0

CONVERGES = "converges"
DIVERGES = "diverges-below-threshold"


@dataclass(frozen=True, eq=False)
class PointSequence:
    """Points of one model space or band, in order.

    ``base_index`` picks the basepoint among ``points``; ``None`` means the
    space's own basepoint.
    """

    space: Any
    points: tuple
    base_index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if not self.points:
            raise EmptySelection("a point sequence must be nonempty")
        check = getattr(self.space, "check", None)
        if check is not None:
            for p in self.points:
                check(p)

    @property
    def base(self):
        if self.base_index is None:
            return self.space.base
        return self.points[self.base_index]

    def __len__(self):
        return len(self.points)

    def to_json(self) -> list:
        return [self.space.point_to_json(p) for p in self.points]


@dataclass(frozen=True)
class ProbeVerdict:
    min_tail_product: float
    verdict: str
    window: int
    threshold: float

    def __post_init__(self):
        expected = CONVERGES if self.min_tail_product > self.threshold else DIVERGES
        if self.verdict != expected:
            raise ValueError(f"verdict {self.verdict!r} contradicts min {self.min_tail_product} "
                             f"vs threshold {self.threshold}")

    @classmethod
    def judge(cls, value: float, window: int, threshold: float) -> "ProbeVerdict":
        return cls(value, CONVERGES if value > threshold else DIVERGES, window, threshold)

    @property
    def converges(self) -> bool:
        return self.verdict == CONVERGES

    def to_json(self) -> dict:
        return {"min_tail_product": self.min_tail_product, "verdict": self.verdict,
                "window": self.window, "threshold": self.threshold}


def _points(seq) -> tuple[Any, Sequence]:
    if isinstance(seq, PointSequence):
        return seq.space, seq.points
    raise TypeError(f"expected a PointSequence, got {type(seq).__name__}")


def tail_gromov_min(seq1: PointSequence, seq2: PointSequence, base=None,
                    window: int = DEFAULT_WINDOW) -> float:
    """``min (x^i . y^j)_base`` over ``i, j`` among the last ``window`` indices.

    ``base`` defaults to the basepoint of ``seq1``.
    """
    space, xs = _points(seq1)
    other, ys = _points(seq2)
    if other is not space:
        raise ConfigError("sequences live in different spaces")
    if len(xs) != len(ys):
        raise LengthMismatch(f"sequence lengths differ: {len(xs)} vs {len(ys)}")
    if window < 2:
        raise ConfigError("window must be at least 2")
    if window > len(xs):
        raise WindowTooLarge(f"window {window} exceeds sequence length {len(xs)}")
    if base is None:
        base = seq1.base
    xs, ys = list(xs[-window:]), list(ys[-window:])
    dx = space.pairwise(xs, [base])[:, 0]
    dy = space.pairwise(ys, [base])[:, 0]
    dxy = space.pairwise(xs, ys)
    return float(np.min(0.5 * (dx[:, None] + dy[None, :] - dxy)))


def class_probe(seq1: PointSequence, seq2: PointSequence, base=None,
                window: int = DEFAULT_WINDOW, threshold: float = DEFAULT_THRESHOLD
                ) -> tuple[ProbeVerdict, ProbeVerdict, bool]:
    """Classify each sequence and flag whether they look equivalent.

    Equivalence requires both sequences to converge and their cross tail
    minimum to exceed ``threshold``.
    """
    v1 = ProbeVerdict.judge(tail_gromov_min(seq1, seq1, base, window), window, threshold)
    v2 = ProbeVerdict.judge(tail_gromov_min(seq2, seq2, base, window), window, threshold)
    equivalent = v1.converges and v2.converges and \
        tail_gromov_min(seq1, seq2, base, window) > threshold
    return v1, v2, equivalent


def descending_sequence(space, x: float, length: int, step: float) -> list:
    """H2 points ``(x, e^{-i step})`` for ``i = 1..length``: a vertical ray
    running down to the boundary point ``x`` (Busemann level ``i step``)."""
    base = space.base
    return [H2Point(x, base.y * float(np.exp(-i * step))) for i in range(1, length + 1)]
