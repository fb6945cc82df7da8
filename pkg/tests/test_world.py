import math

import numpy as np
import pytest

from sonarnav.world import Bounds, Circle, Rect, Segment, World, ray_cast

from oracles import random_free_point, random_world, ray_cast_sampling


def make_world(*obstacles, bounds=(-10, -10, 10, 10)):
    return World(bounds=Bounds(*bounds), obstacles=tuple(obstacles))


class TestRayCast:
    def test_empty_world_misses(self):
        w = make_world()
        assert ray_cast(w, (0, 0), (1, 0), 5.0) is None

    def test_segment_straight_ahead(self):
        w = make_world(Segment(2, -1, 2, 1))
        assert ray_cast(w, (0, 0), (1, 0), 5.0) == pytest.approx(2.0, abs=1e-12)

    def test_obstacle_behind_ray(self):
        w = make_world(Circle(3, 0, 1))
        assert ray_cast(w, (0, 0), (-1, 0), 5.0) is None

    def test_circle_head_on(self):
        w = make_world(Circle(3, 0, 1))
        assert ray_cast(w, (0, 0), (1, 0), 5.0) == pytest.approx(2.0, abs=1e-12)

    def test_tangent_grazing_counts_as_hit(self):
        w = make_world(Circle(3, 1, 1))
        d = ray_cast(w, (0, 0), (1, 0), 10.0)
        assert d == pytest.approx(3.0, abs=1e-6)

    def test_rect_entry_face(self):
        w = make_world(Rect(2, -1, 4, 1))
        assert ray_cast(w, (0, 0), (1, 0), 10.0) == pytest.approx(2.0, abs=1e-12)

    def test_beyond_max_range_misses(self):
        w = make_world(Segment(2, -1, 2, 1))
        assert ray_cast(w, (0, 0), (1, 0), 1.9) is None

    def test_nearest_of_several(self):
        w = make_world(Segment(4, -1, 4, 1), Circle(2.5, 0, 0.5))
        assert ray_cast(w, (0, 0), (1, 0), 10.0) == pytest.approx(2.0, abs=1e-12)

    def test_bounds_do_not_echo(self):
        w = make_world(bounds=(-1, -1, 1, 1))
        assert ray_cast(w, (0, 0), (1, 0), 50.0) is None

    def test_diagonal_segment(self):
        # 45-degree mirror crossing the x axis at x=2
        w = make_world(Segment(1, -1, 3, 1))
        assert ray_cast(w, (0, 0), (1, 0), 10.0) == pytest.approx(2.0, abs=1e-12)

    def test_collinear_ray_hits_near_endpoint(self):
        w = make_world(Segment(2, 0, 3, 0))
        assert ray_cast(w, (0, 0), (1, 0), 10.0) == pytest.approx(2.0, abs=1e-12)

    def test_non_unit_direction_rejected(self):
        w = make_world()
        with pytest.raises(ValueError):
            ray_cast(w, (0, 0), (1, 1), 5.0)

    def test_nonpositive_range_rejected(self):
        w = make_world()
        with pytest.raises(ValueError):
            ray_cast(w, (0, 0), (1, 0), 0.0)


class TestValidation:
    def test_degenerate_bounds(self):
        with pytest.raises(ValueError):
            World(bounds=Bounds(0, 0, 0, 5))

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            make_world(Circle(0, 0, -1))

    def test_zero_area_rect(self):
        with pytest.raises(ValueError):
            make_world(Rect(0, 0, 0, 1))

    def test_degenerate_segment(self):
        with pytest.raises(ValueError):
            make_world(Segment(1, 1, 1, 1))

    def test_obstacle_outside_bounds(self):
        with pytest.raises(ValueError):
            make_world(Circle(9.5, 0, 1))


class TestProperties:
    def test_hit_distance_in_range(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            world = random_world(rng)
            for _ in range(200):
                origin = random_free_point(world, rng)
                ang = rng.uniform(-math.pi, math.pi)
                max_range = rng.uniform(1.0, 4.0)
                d = ray_cast(world, origin, (math.cos(ang), math.sin(ang)),
                             max_range)
                if d is not None:
                    assert 0.0 < d <= max_range

    def test_adding_obstacle_never_increases_distance(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            world = random_world(rng, n_obstacles=3)
            bigger = World(bounds=world.bounds,
                           obstacles=world.obstacles
                           + (Circle(float(rng.uniform(1, 5)),
                                     float(rng.uniform(1, 5)), 0.5),))
            for _ in range(50):
                origin = random_free_point(bigger, rng)
                ang = rng.uniform(-math.pi, math.pi)
                direction = (math.cos(ang), math.sin(ang))
                d0 = ray_cast(world, origin, direction, 4.0)
                d1 = ray_cast(bigger, origin, direction, 4.0)
                if d0 is not None:
                    assert d1 is not None and d1 <= d0 + 1e-12

    def test_agrees_with_sampling_oracle(self):
        # Smaller cousin of the acceptance-gate check, for quick feedback.
        rng = np.random.default_rng(9)
        for _ in range(3):
            world = random_world(rng)
            for _ in range(60):
                origin = random_free_point(world, rng, clearance=2e-3)
                ang = rng.uniform(-math.pi, math.pi)
                direction = (math.cos(ang), math.sin(ang))
                max_range = rng.uniform(1.0, 3.0)
                got = ray_cast(world, origin, direction, max_range)
                want = ray_cast_sampling(world, origin, direction, max_range)
                if want is None:
                    assert got is None
                else:
                    assert got == pytest.approx(want, abs=1e-3)
