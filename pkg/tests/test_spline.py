import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stemtrace import (
    CurveSample,
    Point2,
    StemCurve,
    basis,
    default_samples_per_segment,
    eval_segment,
    eval_segment_derivative,
    num_segments,
    sample_curve,
)

from conftest import curves, points

ts = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


class TestPoint2:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            Point2(float("nan"), 0.0)

    @pytest.mark.parametrize("bad", [float("inf"), float("-inf")])
    def test_rejects_infinity(self, bad):
        with pytest.raises(ValueError):
            Point2(0.0, bad)

    def test_coerces_to_float(self):
        p = Point2(3, 4)
        assert isinstance(p.x, float) and p.as_tuple() == (3.0, 4.0)


class TestBasis:
    def test_endpoint_values(self):
        assert basis(0, 0.0) == pytest.approx(1 / 6, abs=1e-15)
        assert basis(3, 0.0) == 0.0
        assert basis(0, 1.0) == 0.0
        assert basis(3, 1.0) == pytest.approx(1 / 6, abs=1e-15)
        assert basis(1, 0.0) == pytest.approx(4 / 6, abs=1e-15)

    def test_midpoint_value(self):
        # (3t^3 - 6t^2 + 4)/6 at t = 0.5 is 2.875/6
        assert basis(1, 0.5) == pytest.approx(2.875 / 6, abs=1e-15)

    @pytest.mark.parametrize("k", [-1, 4, 10])
    def test_rejects_bad_index(self, k):
        with pytest.raises(ValueError):
            basis(k, 0.5)

    @pytest.mark.parametrize("t", [-0.001, 1.001, float("nan")])
    def test_rejects_bad_parameter(self, t):
        with pytest.raises(ValueError):
            basis(0, t)

    @given(ts)
    def test_partition_of_unity(self, t):
        assert abs(sum(basis(k, t) for k in range(4)) - 1.0) <= 1e-12

    @given(st.integers(min_value=0, max_value=3), ts)
    def test_non_negative(self, k, t):
        assert basis(k, t) >= 0.0


class TestEvalSegment:
    def test_constant_control_points(self):
        ctrl = [Point2(7.0, 9.0)] * 4
        for t in (0.0, 0.25, 0.5, 0.99, 1.0):
            p = eval_segment(ctrl, t)
            assert p.x == pytest.approx(7.0, abs=1e-12)
            assert p.y == pytest.approx(9.0, abs=1e-12)

    def test_collinear_start(self):
        p = eval_segment([(0, 0), (1, 0), (2, 0), (3, 0)], 0.0)
        assert (p.x, p.y) == (1.0, 0.0)

    def test_collinear_midpoint(self):
        # weights at t = 0.5 are (1/48, 23/48, 23/48, 1/48)
        p = eval_segment([(0, 0), (1, 0), (2, 0), (3, 0)], 0.5)
        assert p.x == pytest.approx(1.5, abs=1e-12)
        assert p.y == 0.0

    @pytest.mark.parametrize("n", [3, 5])
    def test_rejects_wrong_arity(self, n):
        with pytest.raises(ValueError):
            eval_segment([(0, 0)] * n, 0.5)

    @given(st.lists(points, min_size=4, max_size=4), ts)
    def test_convex_hull(self, ctrl, t):
        p = eval_segment(ctrl, t)
        xs = [c.x for c in ctrl]
        ys = [c.y for c in ctrl]
        slack = 1e-9
        assert min(xs) - slack <= p.x <= max(xs) + slack
        assert min(ys) - slack <= p.y <= max(ys) + slack

    @given(st.lists(points, min_size=4, max_size=4), ts,
           st.floats(min_value=-math.pi, max_value=math.pi),
           st.floats(min_value=-500, max_value=500),
           st.floats(min_value=-500, max_value=500))
    def test_affine_invariance(self, ctrl, t, angle, shift_x, shift_y):
        cos_a, sin_a = math.cos(angle), math.sin(angle)

        def transform(p):
            return Point2(
                cos_a * p.x - sin_a * p.y + shift_x,
                sin_a * p.x + cos_a * p.y + shift_y,
            )

        direct = transform(eval_segment(ctrl, t))
        moved = eval_segment([transform(c) for c in ctrl], t)
        assert moved.x == pytest.approx(direct.x, abs=1e-9)
        assert moved.y == pytest.approx(direct.y, abs=1e-9)


class TestDerivatives:
    def test_constant_curve_is_flat(self):
        ctrl = [Point2(5.0, 5.0)] * 4
        assert eval_segment_derivative(ctrl, 0.3, 1) == pytest.approx((0.0, 0.0), abs=1e-12)

    def test_collinear_first_derivative(self):
        d = eval_segment_derivative([(0, 0), (1, 0), (2, 0), (3, 0)], 0.0, 1)
        assert d == pytest.approx((1.0, 0.0), abs=1e-12)

    @pytest.mark.parametrize("t", [0.0, 0.3, 0.72, 1.0])
    def test_collinear_second_derivative_cancels(self, t):
        d = eval_segment_derivative([(0, 0), (1, 0), (2, 0), (3, 0)], t, 2)
        assert d == pytest.approx((0.0, 0.0), abs=1e-12)

    @pytest.mark.parametrize("order", [0, 3, -1])
    def test_rejects_unsupported_order(self, order):
        with pytest.raises(ValueError):
            eval_segment_derivative([(0, 0), (1, 0), (2, 0), (3, 0)], 0.5, order)

    @given(st.lists(points, min_size=4, max_size=4),
           st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=50)
    def test_first_derivative_matches_finite_differences(self, ctrl, t):
        h = 1e-6
        a = eval_segment(ctrl, t - h)
        b = eval_segment(ctrl, t + h)
        fd = ((b.x - a.x) / (2 * h), (b.y - a.y) / (2 * h))
        dx, dy = eval_segment_derivative(ctrl, t, 1)
        scale = 1.0 + max(abs(dx), abs(dy))
        assert abs(dx - fd[0]) <= 1e-4 * scale
        assert abs(dy - fd[1]) <= 1e-4 * scale

    @given(st.lists(points, min_size=4, max_size=4),
           st.floats(min_value=0.01, max_value=0.99))
    @settings(max_examples=50)
    def test_second_derivative_matches_finite_differences(self, ctrl, t):
        h = 1e-4
        a = eval_segment(ctrl, t - h)
        b = eval_segment(ctrl, t)
        c = eval_segment(ctrl, t + h)
        fd = ((a.x - 2 * b.x + c.x) / h**2, (a.y - 2 * b.y + c.y) / h**2)
        dx, dy = eval_segment_derivative(ctrl, t, 2)
        scale = 1.0 + max(abs(dx), abs(dy))
        assert abs(dx - fd[0]) <= 1e-3 * scale
        assert abs(dy - fd[1]) <= 1e-3 * scale


class TestCurveStructure:
    def test_segment_counts(self):
        assert num_segments(4) == 1
        assert num_segments(5) == 2
        assert num_segments(10) == 7

    def test_rejects_too_few_points(self):
        with pytest.raises(ValueError, match="insufficient control points"):
            num_segments(3)
        with pytest.raises(ValueError, match="insufficient control points"):
            StemCurve(((0, 0), (1, 1), (2, 2)))

    def test_curve_requires_order_four(self):
        with pytest.raises(ValueError):
            StemCurve(((0, 0), (1, 1), (2, 2), (3, 3)), order=3)

    def test_duplicate_points_permitted(self):
        curve = StemCurve(((1, 1), (1, 1), (2, 2), (3, 3)))
        assert curve.num_segments == 1

    def test_sample_count_single_segment(self):
        curve = StemCurve(((0, 0), (1, 0), (2, 0), (3, 0)))
        samples = sample_curve(curve, 2)
        assert [(s.segment_index, s.t) for s in samples] == [(0, 0.0), (0, 1.0)]

    def test_sample_count_with_shared_joint(self):
        curve = StemCurve(((0, 0), (1, 0), (2, 0), (3, 0), (4, 0)))
        samples = sample_curve(curve, 3)
        assert len(samples) == 5
        assert [(s.segment_index, s.t) for s in samples] == [
            (0, 0.0), (0, 0.5), (0, 1.0), (1, 0.5), (1, 1.0),
        ]

    def test_constant_curve_samples(self):
        curve = StemCurve(tuple([Point2(4.0, 4.0)] * 6))
        for s in sample_curve(curve, 5):
            assert s.position.x == pytest.approx(4.0, abs=1e-12)
            assert s.position.y == pytest.approx(4.0, abs=1e-12)

    def test_rejects_sparse_sampling(self):
        curve = StemCurve(((0, 0), (1, 0), (2, 0), (3, 0)))
        with pytest.raises(ValueError):
            sample_curve(curve, 1)

    @given(curves(4, 9), st.integers(min_value=2, max_value=7))
    def test_sample_count_formula(self, curve, spp):
        samples = sample_curve(curve, spp)
        assert len(samples) == curve.num_segments * spp - (curve.num_segments - 1)
        order = [(s.segment_index, s.t) for s in samples]
        assert order == sorted(order)

    def test_sample_positions_match_construction(self):
        curve = StemCurve(((0, 0), (10, 5), (20, 0), (30, 5), (40, 0)))
        for s in sample_curve(curve, 9):
            direct = eval_segment(curve.segment_control_points(s.segment_index), s.t)
            assert s.position == direct


class TestContinuity:
    def test_joints_are_c2(self, rng):
        for _ in range(25):
            n = rng.randint(6, 10)
            curve = StemCurve(
                tuple(Point2(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(n))
            )
            for i in range(curve.num_segments - 1):
                left = curve.segment_control_points(i)
                right = curve.segment_control_points(i + 1)
                pl, pr = eval_segment(left, 1.0), eval_segment(right, 0.0)
                assert pl.x == pytest.approx(pr.x, abs=1e-9)
                assert pl.y == pytest.approx(pr.y, abs=1e-9)
                for order in (1, 2):
                    dl = eval_segment_derivative(left, 1.0, order)
                    dr = eval_segment_derivative(right, 0.0, order)
                    assert dl == pytest.approx(dr, abs=1e-9)


class TestLocalControl:
    def test_perturbing_one_point_is_local(self, rng):
        for _ in range(25):
            n = rng.randint(6, 12)
            pts = [Point2(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(n)]
            curve = StemCurve(tuple(pts))
            j = rng.randrange(n)
            moved = list(pts)
            moved[j] = Point2(moved[j].x + rng.uniform(1, 50), moved[j].y - rng.uniform(1, 50))
            perturbed = StemCurve(tuple(moved))
            before = sample_curve(curve, 7)
            after = sample_curve(perturbed, 7)
            affected = range(j - 3, j + 1)
            for s_before, s_after in zip(before, after):
                if s_before.segment_index not in affected:
                    assert s_before.position.x == s_after.position.x
                    assert s_before.position.y == s_after.position.y


class TestClamping:
    def test_clamped_curve_touches_endpoints(self):
        curve = StemCurve(((10, 20), (40, 60), (90, 30), (120, 80)))
        clamped = curve.clamped()
        assert clamped.num_segments == curve.num_segments + 4
        first = sample_curve(clamped, 2)[0].position
        last = sample_curve(clamped, 2)[-1].position
        assert (first.x, first.y) == pytest.approx((10.0, 20.0), abs=1e-12)
        assert (last.x, last.y) == pytest.approx((120.0, 80.0), abs=1e-12)

    def test_unclamped_curve_does_not(self):
        curve = StemCurve(((10, 20), (40, 60), (90, 30), (120, 80)))
        first = sample_curve(curve, 2)[0].position
        assert (first.x, first.y) != (10.0, 20.0)


class TestDefaultSampling:
    def test_floor_of_32(self):
        tiny = StemCurve(((0, 0), (0.5, 0), (1, 0), (1.5, 0)))
        assert default_samples_per_segment(tiny) == 32

    def test_scales_with_polygon_length(self):
        long = StemCurve(((0, 0), (0, 400), (0, 800), (0, 1200)))
        # one segment, polygon length 1200 -> 2 * 1200 samples
        assert default_samples_per_segment(long) == 2400

    def test_adjacent_samples_stay_subpixel(self, rng):
        for _ in range(10):
            curve = StemCurve(
                tuple(Point2(rng.uniform(0, 2000), rng.uniform(0, 2000)) for _ in range(rng.randint(4, 6)))
            )
            samples = sample_curve(curve, default_samples_per_segment(curve))
            positions = [s.position for s in samples]
            worst = max(
                math.dist(a.as_tuple(), b.as_tuple()) for a, b in zip(positions, positions[1:])
            )
            assert worst < 1.0
