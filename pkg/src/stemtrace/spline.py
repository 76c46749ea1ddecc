"""Uniform cubic B-spline evaluation for stem curves.

A stem is annotated with a handful of control points placed base to tip.
Every window of four consecutive points defines one cubic segment, so a
curve with n points has n - 3 segments.  The four basis weights used here
are non-negative and sum to exactly 1 at every parameter value, which is
what keeps segments inside the convex hull of their control points and
makes a constant control polygon reproduce a constant curve.  Moving one
control point only affects the (at most four) segments that use it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

SPLINE_ORDER = 4


@dataclass(frozen=True)
class Point2:
    """A sub-pixel image coordinate.  Rejects NaN and infinity."""

    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"point coordinates must be finite, got ({self.x}, {self.y})")

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def as_point(p: "Point2 | Sequence[float]") -> Point2:
    """Coerce a Point2 or (x, y) pair into a Point2."""
    if isinstance(p, Point2):
        return p
    x, y = p
    return Point2(float(x), float(y))


@dataclass(frozen=True)
class StemCurve:
    """An ordered run of control points (base to tip) with spline order 4."""

    control_points: tuple[Point2, ...]
    order: int = SPLINE_ORDER

    def __post_init__(self) -> None:
        pts = tuple(as_point(p) for p in self.control_points)
        object.__setattr__(self, "control_points", pts)
        if self.order != SPLINE_ORDER:
            raise ValueError(f"only order-{SPLINE_ORDER} splines are supported, got order {self.order}")
        if len(pts) < SPLINE_ORDER:
            raise ValueError(
                f"insufficient control points: need at least {SPLINE_ORDER}, got {len(pts)}"
            )

    @property
    def num_segments(self) -> int:
        return len(self.control_points) - 3

    def segment_control_points(self, i: int) -> tuple[Point2, Point2, Point2, Point2]:
        """The four control points that define segment i."""
        if not 0 <= i < self.num_segments:
            raise ValueError(f"segment index {i} out of range [0, {self.num_segments})")
        return self.control_points[i : i + 4]

    def clamped(self) -> "StemCurve":
        """A copy with the first and last control points triplicated.

        The plain curve starts and ends strictly inside its control polygon;
        the clamped variant touches the first and last annotated points,
        which is what an annotator clicking the stem base and tip expects.
        """
        pts = self.control_points
        return StemCurve((pts[0], pts[0]) + pts + (pts[-1], pts[-1]))


@dataclass(frozen=True)
class CurveSample:
    """One evaluated point along a curve: position of segment `segment_index` at `t`."""

    segment_index: int
    t: float
    position: Point2


def basis(k: int, t: float) -> float:
    """The k-th uniform cubic B-spline basis weight at parameter t in [0, 1].

    All four weights are >= 0 and sum to 1 (to floating-point roundoff)
    for every t in the domain.
    """
    if k not in (0, 1, 2, 3):
        raise ValueError(f"basis index must be in {{0, 1, 2, 3}}, got {k!r}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t must be in [0, 1], got {t!r}")
    if k == 0:
        return (1.0 - t) ** 3 / 6.0
    if k == 1:
        return (3.0 * t**3 - 6.0 * t**2 + 4.0) / 6.0
    if k == 2:
        return (-3.0 * t**3 + 3.0 * t**2 + 3.0 * t + 1.0) / 6.0
    return t**3 / 6.0


def _basis_derivative(k: int, t: float, order: int) -> float:
    if order == 1:
        if k == 0:
            return -((1.0 - t) ** 2) / 2.0
        if k == 1:
            return (9.0 * t**2 - 12.0 * t) / 6.0
        if k == 2:
            return (-9.0 * t**2 + 6.0 * t + 3.0) / 6.0
        return t**2 / 2.0
    # order == 2
    if k == 0:
        return 1.0 - t
    if k == 1:
        return 3.0 * t - 2.0
    if k == 2:
        return 1.0 - 3.0 * t
    return t


def _require_four(ctrl: Sequence[Point2 | Sequence[float]]) -> tuple[Point2, ...]:
    pts = tuple(as_point(p) for p in ctrl)
    if len(pts) != 4:
        raise ValueError(f"segment evaluation needs exactly 4 control points, got {len(pts)}")
    return pts


def eval_segment(ctrl: Sequence[Point2 | Sequence[float]], t: float) -> Point2:
    """Evaluate one cubic segment: the basis-weighted blend of its 4 control points."""
    pts = _require_four(ctrl)
    x = 0.0
    y = 0.0
    for k in range(4):
        w = basis(k, t)
        x += pts[k].x * w
        y += pts[k].y * w
    return Point2(x, y)


def eval_segment_derivative(
    ctrl: Sequence[Point2 | Sequence[float]],
    t: float,
    derivative_order: int = 1,
) -> tuple[float, float]:
    """Analytic first or second derivative of a segment, in pixels per unit t."""
    pts = _require_four(ctrl)
    if derivative_order not in (1, 2):
        raise ValueError(f"derivative_order must be 1 or 2, got {derivative_order!r}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t must be in [0, 1], got {t!r}")
    dx = 0.0
    dy = 0.0
    for k in range(4):
        w = _basis_derivative(k, t, derivative_order)
        dx += pts[k].x * w
        dy += pts[k].y * w
    return (dx, dy)


def num_segments(n_control_points: int) -> int:
    """Segment count for a control-point run: n - 3."""
    if n_control_points < SPLINE_ORDER:
        raise ValueError(
            f"insufficient control points: need at least {SPLINE_ORDER}, got {n_control_points}"
        )
    return n_control_points - 3


def sample_curve(curve: StemCurve, samples_per_segment: int) -> list[CurveSample]:
    """Evaluate the whole curve on a regular per-segment parameter grid.

    Each segment i is sampled at t = j / (samples_per_segment - 1).  The
    shared joint between consecutive segments is emitted once (by the
    earlier segment), so the result has
    num_segments * samples_per_segment - (num_segments - 1) entries,
    ordered by increasing (segment, t).
    """
    if samples_per_segment < 2:
        raise ValueError(f"samples_per_segment must be >= 2, got {samples_per_segment}")
    out: list[CurveSample] = []
    denom = samples_per_segment - 1
    for i in range(curve.num_segments):
        ctrl = curve.segment_control_points(i)
        first = 1 if i > 0 else 0  # joint point already emitted by the previous segment
        for j in range(first, samples_per_segment):
            t = j / denom
            out.append(CurveSample(i, t, eval_segment(ctrl, t)))
    return out


def default_samples_per_segment(curve: StemCurve) -> int:
    """Sampling density that keeps adjacent samples well under one pixel apart.

    Twice the control-polygon length (in pixels) per segment, floored at 32.
    """
    pts = curve.control_points
    length = sum(math.dist(a.as_tuple(), b.as_tuple()) for a, b in zip(pts, pts[1:]))
    return max(32, 2 * math.ceil(length / curve.num_segments))
