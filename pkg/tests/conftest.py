from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import strategies as st

from stemtrace import BinaryMask, ControlPointAnnotation, Point2, StemCurve

coordinates = st.floats(min_value=-1000.0, max_value=1000.0, allow_nan=False, allow_infinity=False)
points = st.builds(Point2, coordinates, coordinates)


def curves(min_points: int = 4, max_points: int = 10):
    return st.lists(points, min_size=min_points, max_size=max_points).map(
        lambda pts: StemCurve(tuple(pts))
    )


def mask_arrays(max_side: int = 24):
    sides = st.integers(min_value=1, max_value=max_side)
    return st.tuples(sides, sides).flatmap(
        lambda wh: st.binary(min_size=wh[0] * wh[1], max_size=wh[0] * wh[1]).map(
            lambda raw: np.frombuffer(raw, dtype=np.uint8).reshape(wh[1], wh[0]) >= 128
        )
    )


masks = mask_arrays().map(BinaryMask)


def random_curve(rng: random.Random, n_points: int, lo: float = 0.0, hi: float = 1000.0) -> StemCurve:
    return StemCurve(
        tuple(Point2(rng.uniform(lo, hi), rng.uniform(lo, hi)) for _ in range(n_points))
    )


def random_annotation(rng: random.Random) -> ControlPointAnnotation:
    width = rng.randint(8, 4000)
    height = rng.randint(8, 4000)
    stems = []
    for _ in range(rng.randint(1, 4)):
        n = rng.randint(4, 8)
        stems.append(
            tuple(
                Point2(rng.uniform(-0.4 * width, 1.4 * width), rng.uniform(-0.4 * height, 1.4 * height))
                for _ in range(n)
            )
        )
    image_id = "img_" + "".join(rng.choice("abcdefghijklmnopqrstuvwxyz0123456789_-") for _ in range(8))
    return ControlPointAnnotation(
        image_id=image_id,
        image_width=width,
        image_height=height,
        stems=tuple(stems),
        tau=rng.randint(1, 60),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240131)
