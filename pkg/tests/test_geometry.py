import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import exact_inside_bounds, exact_sweep_clearance
from drrtstar.geometry2d import (
    DiskRobot,
    Polygon,
    Workspace,
    disks_collide,
    dyadic_intervals,
    point_free,
    points_free,
    segment_free,
    segments_free,
)

SQUARE = Polygon([(4, 4), (6, 4), (6, 6), (4, 6)])
W = Workspace((0.0, 0.0, 10.2, 10.2), (SQUARE,))
coord = st.floats(0.0, 10.2, allow_nan=False)


class TestPolygon:
    def test_clockwise_input_is_reoriented(self):
        p = Polygon([(0, 0), (0, 1), (1, 1), (1, 0)])
        assert p.area == pytest.approx(1.0)

    @pytest.mark.parametrize("verts", [
        [(0, 0), (1, 0)],
        [(0, 0), (1, 1), (1, 0), (0, 1)],
        [(0, 0), (1, 0), (1, 0), (0, 1)],
        [(0, 0), (1, 1), (2, 2)],
        [(0, 0), (1, 0), (math.nan, 1)],
    ])
    def test_invalid_polygons_rejected(self, verts):
        with pytest.raises(ValueError):
            Polygon(verts)

    def test_obstacle_outside_bounds_rejected(self):
        with pytest.raises(ValueError):
            Workspace((0, 0, 1, 1), (Polygon([(0.5, 0.5), (2, 0.5), (2, 2)]),))

    def test_degenerate_bounds_rejected(self):
        with pytest.raises(ValueError):
            Workspace((0, 0, 0, 1))


class TestPointFree:
    def test_empty_workspace_center(self):
        assert point_free((5, 5), 0.2, Workspace((0, 0, 10.2, 10.2)))

    def test_disk_leaving_bounds(self):
        assert not point_free((0.1, 5), 0.2, Workspace((0, 0, 10.2, 10.2)))

    def test_touching_obstacle_is_free(self):
        assert point_free((3.8, 5.0), 0.2, W)
        assert not point_free((3.81, 5.0), 0.2, W)

    def test_center_inside_obstacle(self):
        big = Workspace((0, 0, 10, 10), (Polygon([(1, 1), (9, 1), (9, 9), (1, 9)]),))
        assert not point_free((5, 5), 0.2, big)

    def test_robot_start_goal_must_be_valid(self):
        with pytest.raises(ValueError):
            DiskRobot(0.0, (0, 0), (1, 1))

    @given(st.lists(st.tuples(coord, coord), min_size=1, max_size=20), st.randoms())
    @settings(max_examples=50, deadline=None)
    def test_obstacle_order_irrelevant(self, pts, rnd):
        obs = [SQUARE, Polygon([(1, 1), (2, 1), (1.5, 2)]), Polygon([(7, 7), (9, 7), (9, 8), (8, 9)])]
        shuffled = obs[:]
        rnd.shuffle(shuffled)
        a = points_free(pts, 0.3, Workspace((0, 0, 10.2, 10.2), tuple(obs)))
        b = points_free(pts, 0.3, Workspace((0, 0, 10.2, 10.2), tuple(shuffled)))
        assert np.array_equal(a, b)

    @given(coord, coord)
    @settings(max_examples=200, deadline=None)
    def test_matches_exact_distance(self, x, y):
        clearance = exact_sweep_clearance((x, y), (x, y), W)
        inside = exact_inside_bounds((x, y), (x, y), 0.2, W)
        expected = inside and clearance >= 0.2
        if abs(clearance - 0.2) > 1e-9:
            assert point_free((x, y), 0.2, W) == expected


class TestSegmentFree:
    def test_empty_workspace(self):
        w = Workspace((0, 0, 10, 10))
        assert segment_free((1, 1), (9, 9), 0.2, w)

    def test_crossing_obstacle(self):
        assert not segment_free((2, 5), (8, 5), 0.2, W)

    def test_midpoint_clearance_deficit(self):
        # passes 0.15 below the square's bottom edge: deficit 0.05
        a, b = (3.0, 3.85), (7.0, 3.85)
        assert exact_sweep_clearance(a, b, W) == pytest.approx(0.15)
        for step in (0.05, 0.0005):
            assert not segment_free(a, b, 0.2, W, step=step)
        # grazing at exactly the radius is free
        assert segment_free((3.0, 3.8), (7.0, 3.8), 0.2, W)

    def test_dyadic_counts(self):
        assert dyadic_intervals(0.0, 0.05) == 1
        assert dyadic_intervals(0.05, 0.05) == 1
        assert dyadic_intervals(0.06, 0.05) == 2
        assert dyadic_intervals(1.0, 0.05) == 32

    @given(coord, coord, coord, coord)
    @settings(max_examples=300, deadline=None)
    def test_sampled_check_brackets_exact_sweep(self, x0, y0, x1, y1):
        step = 0.05
        a, b = (x0, y0), (x1, y1)
        got = segment_free(a, b, 0.2, W, step)
        clearance = exact_sweep_clearance(a, b, W)
        inside = exact_inside_bounds(a, b, 0.2, W)
        if inside and clearance >= 0.2:
            assert got
        if got:
            # every point of the sweep lies within step/2 of a checked sample
            assert inside and clearance >= 0.2 - step / 2 - 1e-12

    @given(coord, coord, coord, coord, st.integers(0, 6))
    @settings(max_examples=200, deadline=None)
    def test_monotone_in_step(self, x0, y0, x1, y1, k):
        coarse = 0.4 / 2 ** k
        if not segment_free((x0, y0), (x1, y1), 0.2, W, coarse):
            assert not segment_free((x0, y0), (x1, y1), 0.2, W, coarse / 2)
            assert not segment_free((x0, y0), (x1, y1), 0.2, W, coarse / 8)

    @given(st.lists(st.tuples(coord, coord, coord, coord), min_size=1, max_size=30))
    @settings(max_examples=50, deadline=None)
    def test_vectorized_matches_scalar(self, segs):
        s = np.array(segs)
        batch = segments_free(s[:, :2], s[:, 2:], 0.2, W, 0.05)
        single = [segment_free(r[:2], r[2:], 0.2, W, 0.05) for r in s]
        assert batch.tolist() == single

    def test_convex_clearance_guarantee(self):
        rng = np.random.default_rng(3)
        checked = 0
        while checked < 300:
            a, b = rng.uniform(0.3, 9.9, (2, 2))
            if exact_sweep_clearance(a, b, W) >= 0.2 and exact_inside_bounds(a, b, 0.2, W):
                for step in (0.5, 0.05, 0.001):
                    assert segment_free(a, b, 0.2, W, step)
                checked += 1


class TestDisks:
    def test_examples(self):
        assert disks_collide((0, 0), 0.2, (0.39, 0), 0.2)
        assert not disks_collide((0, 0), 0.2, (0.40, 0), 0.2)
        assert disks_collide((1, 1), 0.2, (1, 1), 0.2)

    @given(coord, coord, coord, coord, st.floats(0.01, 2), st.floats(0.01, 2))
    def test_symmetry(self, x0, y0, x1, y1, r0, r1):
        assert disks_collide((x0, y0), r0, (x1, y1), r1) == disks_collide((x1, y1), r1, (x0, y0), r0)
