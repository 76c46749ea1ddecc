"""Rasterize sampled stem curves into binary masks and thicken them by dilation.

The pipeline is: sample the spline densely, connect consecutive samples
with integer line drawing into a one-pixel-wide polyline, then dilate the
polyline with a disk to reach the target stem width.  A target width of
``tau`` pixels uses a disk of radius ``tau // 2`` (on-axis width
``2 * (tau // 2) + 1``), which thickens the curve uniformly in every
direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .spline import (
    Point2,
    StemCurve,
    as_point,
    default_samples_per_segment,
    sample_curve,
)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """A width x height bitmap; True marks stem pixels.

    The backing array is row-major with shape (height, width) and is made
    read-only on construction, so masks are safe to share across threads.
    Input arrays are copied unless already frozen and owning their data.
    """

    pixels: np.ndarray

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels)
        if px.ndim != 2:
            raise ValueError(f"mask must be a 2-D array, got {px.ndim} dimensions")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError(f"mask dimensions must be >= 1, got shape {px.shape}")
        if px.dtype != np.bool_:
            px = px.astype(np.bool_)
        px = np.ascontiguousarray(px)
        # Adopt only frozen arrays that own their data; anything else gets
        # copied so the caller (or a view's base) can never mutate the mask.
        if px.flags.writeable or px.base is not None:
            if px is self.pixels or px.base is not None:
                px = px.copy()
            px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @classmethod
    def zeros(cls, width: int, height: int) -> "BinaryMask":
        if width < 1 or height < 1:
            raise ValueError(f"mask dimensions must be >= 1, got {width}x{height}")
        grid = np.zeros((height, width), dtype=np.bool_)
        grid.setflags(write=False)
        return cls(grid)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def count_set(self) -> int:
        return int(np.count_nonzero(self.pixels))

    def get(self, x: int, y: int) -> bool:
        return bool(self.pixels[y, x])

    def union(self, other: "BinaryMask") -> "BinaryMask":
        if self.pixels.shape != other.pixels.shape:
            raise ValueError(
                f"mask dimensions differ: {self.width}x{self.height} vs {other.width}x{other.height}"
            )
        merged = self.pixels | other.pixels
        merged.setflags(write=False)
        return BinaryMask(merged)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BinaryMask):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True)
class StructuringElement:
    """Pixel-offset footprint for dilation: all (dx, dy) with dx^2 + dy^2 <= radius^2."""

    radius: int
    offsets: frozenset[tuple[int, int]]

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError(f"radius must be >= 0, got {self.radius}")
        offs = frozenset((int(dx), int(dy)) for dx, dy in self.offsets)
        object.__setattr__(self, "offsets", offs)
        if (0, 0) not in offs:
            raise ValueError("structuring element must contain the origin (0, 0)")
        r2 = self.radius * self.radius
        for dx, dy in offs:
            if (-dx, -dy) not in offs:
                raise ValueError(f"offsets must be symmetric under negation; ({dx}, {dy}) is not")
            if dx * dx + dy * dy > r2:
                raise ValueError(f"offset ({dx}, {dy}) lies outside radius {self.radius}")

    @classmethod
    def disk(cls, radius: int) -> "StructuringElement":
        if radius < 0:
            raise ValueError(f"radius must be >= 0, got {radius}")
        r2 = radius * radius
        offs = frozenset(
            (dx, dy)
            for dx in range(-radius, radius + 1)
            for dy in range(-radius, radius + 1)
            if dx * dx + dy * dy <= r2
        )
        return cls(radius, offs)


def round_half_away(v: float) -> int:
    """Round to the nearest integer with ties going away from zero."""
    if v >= 0.0:
        return int(math.floor(v + 0.5))
    return int(math.ceil(v - 0.5))


def _clip_segment(
    x0: float, y0: float, x1: float, y1: float,
    xmin: float, ymin: float, xmax: float, ymax: float,
) -> tuple[float, float, float, float] | None:
    """Liang-Barsky clip of a segment to a rectangle; None if fully outside."""
    dx = x1 - x0
    dy = y1 - y0
    t0, t1 = 0.0, 1.0
    for p, q in (
        (-dx, x0 - xmin),
        (dx, xmax - x0),
        (-dy, y0 - ymin),
        (dy, ymax - y0),
    ):
        if p == 0.0:
            if q < 0.0:
                return None
            continue
        r = q / p
        if p < 0.0:
            if r > t1:
                return None
            if r > t0:
                t0 = r
        else:
            if r < t0:
                return None
            if r < t1:
                t1 = r
    return (x0 + t0 * dx, y0 + t0 * dy, x0 + t1 * dx, y0 + t1 * dy)


def _line_pixels(x0: int, y0: int, x1: int, y1: int) -> Iterable[tuple[int, int]]:
    """Integer line stepping from (x0, y0) to (x1, y1), inclusive, 8-connected."""
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx - dy
    x, y = x0, y0
    while True:
        yield (x, y)
        if x == x1 and y == y1:
            return
        e2 = 2 * err
        if e2 > -dy:
            err -= dy
            x += sx
        if e2 < dx:
            err += dx
            y += sy


def rasterize_polyline(
    samples: Sequence[Point2 | Sequence[float]],
    width: int,
    height: int,
) -> BinaryMask:
    """Draw the polyline through the samples as a one-pixel-wide mask.

    Consecutive samples are connected by integer line drawing after
    rounding to the nearest pixel (ties away from zero).  Geometry outside
    the canvas is clipped; a fully out-of-bounds polyline yields an
    all-zero mask.
    """
    if width < 1 or height < 1:
        raise ValueError(f"mask dimensions must be >= 1, got {width}x{height}")
    pts = [as_point(s) for s in samples]
    if not pts:
        raise ValueError("rasterize_polyline needs at least one sample")

    grid = np.zeros((height, width), dtype=np.bool_)
    # Clip against the canvas grown by one pixel so border geometry still
    # rounds onto the edge rows/columns.
    xmin, ymin = -1.0, -1.0
    xmax, ymax = float(width), float(height)

    def _set(px: int, py: int) -> None:
        if 0 <= px < width and 0 <= py < height:
            grid[py, px] = True

    if len(pts) == 1:
        _set(round_half_away(pts[0].x), round_half_away(pts[0].y))
    else:
        for a, b in zip(pts, pts[1:]):
            clipped = _clip_segment(a.x, a.y, b.x, b.y, xmin, ymin, xmax, ymax)
            if clipped is None:
                continue
            cx0, cy0, cx1, cy1 = clipped
            ix0, iy0 = round_half_away(cx0), round_half_away(cy0)
            ix1, iy1 = round_half_away(cx1), round_half_away(cy1)
            for px, py in _line_pixels(ix0, iy0, ix1, iy1):
                _set(px, py)

    grid.setflags(write=False)
    return BinaryMask(grid)


def dilate(mask: BinaryMask, element: StructuringElement) -> BinaryMask:
    """Morphological dilation: output (x, y) is set iff some element offset
    (dx, dy) has input (x - dx, y - dy) set.  Output dimensions equal input
    dimensions; effects clip at the borders.
    """
    offsets = sorted(element.offsets)
    if offsets == [(0, 0)]:
        return mask
    src = mask.pixels
    h, w = src.shape
    out = np.zeros((h, w), dtype=np.bool_)
    ys, xs = np.nonzero(src)
    n_set = int(xs.size)
    if n_set == 0:
        out.setflags(write=False)
        return BinaryMask(out)

    if n_set * len(offsets) <= 4 * h * w:
        # Sparse input: scatter every set pixel through the footprint.
        for dx, dy in offsets:
            nx = xs + dx
            ny = ys + dy
            keep = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
            out[ny[keep], nx[keep]] = True
    else:
        # Dense input: OR together border-clipped shifts of the whole mask.
        for dx, dy in offsets:
            x0, x1 = max(dx, 0), w + min(dx, 0)
            y0, y1 = max(dy, 0), h + min(dy, 0)
            if x0 >= x1 or y0 >= y1:
                continue
            out[y0:y1, x0:x1] |= src[y0 - dy : y1 - dy, x0 - dx : x1 - dx]

    out.setflags(write=False)
    return BinaryMask(out)


def generate_stem_mask(
    curve: StemCurve,
    tau: int,
    width: int,
    height: int,
    samples_per_segment: int | None = None,
) -> BinaryMask:
    """Full pipeline for one stem: sample, rasterize, dilate to width tau.

    ``samples_per_segment`` defaults to a density derived from the control
    polygon length (see :func:`default_samples_per_segment`).  tau = 1
    leaves the rasterized polyline untouched.
    """
    if tau < 1:
        raise ValueError(f"tau must be >= 1 pixel, got {tau}")
    spp = samples_per_segment if samples_per_segment is not None else default_samples_per_segment(curve)
    samples = sample_curve(curve, spp)
    line = rasterize_polyline([s.position for s in samples], width, height)
    return dilate(line, StructuringElement.disk(tau // 2))


def generate_annotation_mask(
    stems: Sequence[Sequence[Point2 | Sequence[float]]],
    tau: int,
    width: int,
    height: int,
    samples_per_segment: int | None = None,
    clamp_ends: bool = False,
) -> BinaryMask:
    """Union of per-stem masks for one image's worth of control points."""
    if not stems:
        raise ValueError("at least one stem is required")
    out = np.zeros((height, width), dtype=np.bool_)
    for points in stems:
        curve = StemCurve(tuple(points))
        if clamp_ends:
            curve = curve.clamped()
        mask = generate_stem_mask(curve, tau, width, height, samples_per_segment)
        out |= mask.pixels
    out.setflags(write=False)
    return BinaryMask(out)


def resolved_samples_per_segment(
    stem_points: Sequence[Point2 | Sequence[float]],
    samples_per_segment: int | None = None,
    clamp_ends: bool = False,
) -> int:
    """The sampling density a stem would actually be drawn with."""
    if samples_per_segment is not None:
        return samples_per_segment
    curve = StemCurve(tuple(stem_points))
    if clamp_ends:
        curve = curve.clamped()
    return default_samples_per_segment(curve)
