import math

import numpy as np
import pytest

from sonarnav.mapping import (OccupancyGrid, SonarInverseModel, fuse_into_global,
                              load_map, log_odds, new_grid, pgm_pixels,
                              probability, save_map, traverse_cells,
                              update_from_sweep)
from sonarnav.robot import Pose
from sonarnav.sensor import (EchoMeasurement, SensorParams,
                             echo_time_from_distance, sweep)
from sonarnav.world import Bounds, Segment, World

from oracles import crossed_cells_brute, expected_sweep_update

MODEL = SonarInverseModel(occupied_band=0.1)


def echo(bearing: float, distance) -> EchoMeasurement:
    t = None if distance is None else echo_time_from_distance(distance, 343.0)
    return EchoMeasurement(bearing, t)


class TestNewGrid:
    def test_fresh_grid_all_unknown(self):
        g = new_grid((0, 0), 0.1, 10, 10)
        assert g.cells.shape == (10, 10)
        assert np.all(g.cells == 0.0)
        assert np.all(g.probability_map() == 0.5)

    def test_local_map_sized_to_sensor_disc(self):
        # square side 2 * max_range for a 3 m sensor at 0.1 m cells
        side = math.ceil(2 * 3.0 / 0.1)
        assert side == 60
        g = new_grid((-3, -3), 0.1, side, side)
        assert g.width == g.height == 60

    def test_bad_dimensions(self):
        with pytest.raises(ValueError):
            new_grid((0, 0), 0.0, 5, 5)
        with pytest.raises(ValueError):
            new_grid((0, 0), 0.1, 0, 5)


class TestProbability:
    def test_unknown_is_half(self):
        assert probability(0.0) == 0.5

    def test_clamp_limits(self):
        assert probability(6.0) == pytest.approx(0.99753, abs=1e-5)
        assert probability(-6.0) == pytest.approx(0.00247, abs=1e-5)

    def test_strictly_increasing(self):
        ls = np.linspace(-6, 6, 200)
        ps = probability(ls)
        assert np.all(np.diff(ps) > 0)

    def test_symmetry(self):
        for l in np.linspace(-6, 6, 50):
            assert abs(probability(-l) - (1.0 - probability(l))) < 1e-12

    def test_log_odds_inverse(self):
        for l in np.linspace(-5, 5, 50):
            assert log_odds(probability(l)) == pytest.approx(l, abs=1e-9)


class TestTraversal:
    def test_matches_brute_force_on_random_rays(self):
        rng = np.random.default_rng(21)
        g = new_grid((-1.0, -1.0), 0.13, 23, 19)
        for _ in range(300):
            ox = rng.uniform(-0.9, 1.8)
            oy = rng.uniform(-0.9, 1.3)
            ang = rng.uniform(-math.pi, math.pi)
            t_end = rng.uniform(0.1, 4.0)
            d = (math.cos(ang), math.sin(ang))
            walked = list(traverse_cells(g, (ox, oy), d, t_end))
            assert len(set(walked)) == len(walked)
            assert set(walked) == set(crossed_cells_brute(g, (ox, oy), d, t_end))

    def test_axis_aligned_walk(self):
        g = new_grid((0, 0), 0.5, 10, 10)
        cells = list(traverse_cells(g, (0.25, 0.25), (1.0, 0.0), 2.0))
        assert cells == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]

    def test_diagonal_corner_tie_steps_diagonally(self):
        g = new_grid((0, 0), 1.0, 6, 6)
        s = math.sqrt(0.5)
        cells = list(traverse_cells(g, (0.5, 0.5), (s, s), 3.0))
        assert cells == [(0, 0), (1, 1), (2, 2)]

    def test_origin_outside_grid_rejected(self):
        g = new_grid((0, 0), 1.0, 4, 4)
        with pytest.raises(ValueError):
            list(traverse_cells(g, (-1.0, 0.5), (1.0, 0.0), 2.0))


class TestUpdateFromSweep:
    def test_empty_measurements_keep_grid(self):
        g = new_grid((0, 0), 0.1, 15, 15)
        update_from_sweep(g, Pose(0.75, 0.75, 0), [], SensorParams(), MODEL)
        assert np.all(g.cells == 0.0)

    def test_single_beam_spec_example(self):
        # Beam straight ahead, hit at 1.0 m, 0.1 m cells, pose at a cell
        # center: the 9 traversed cells short of the range band get l_free
        # and the cell containing the hit point gets l_occ.
        g = new_grid((0, 0), 0.1, 21, 21)
        pose = Pose(1.05, 1.05, 0.0)
        update_from_sweep(g, pose, [echo(0.0, 1.0)],
                          SensorParams(max_range=3.0), MODEL)
        row = g.cells[10, :]
        assert list(row[10:19]) == [MODEL.l_free] * 9
        assert row[20] == MODEL.l_occ
        # The cell whose center projects exactly one band short of the range
        # straddles the strict boundary at double precision; exact-decimal
        # arithmetic would leave it untouched.
        assert row[19] in (0.0, MODEL.l_occ)
        untouched = np.ones_like(g.cells, dtype=bool)
        untouched[10, 10:21] = False
        assert np.all(g.cells[untouched] == 0.0)

    def test_single_beam_binary_exact_boundaries(self):
        # Same structure with power-of-two geometry, where the strict
        # boundary comparisons are exact: band-edge cells stay untouched.
        model = SonarInverseModel(occupied_band=0.125)
        g = new_grid((0, 0), 0.125, 17, 17)
        pose = Pose(8.5 * 0.125, 8.5 * 0.125, 0.0)
        update_from_sweep(g, pose, [echo(0.0, 1.0)],
                          SensorParams(max_range=3.0), model)
        row = g.cells[8, :]
        t_c = {ix: (ix - 8) * 0.125 for ix in range(17)}
        for ix, t in t_c.items():
            if t < 0:
                assert row[ix] == 0.0
            elif t < 0.875:
                assert row[ix] == model.l_free
            elif t == 1.0:
                assert row[ix] == model.l_occ
            else:
                assert row[ix] == 0.0  # band edges 0.875 and 1.125 excluded

    def test_no_echo_beam_frees_to_max_range(self):
        g = new_grid((0, 0), 0.1, 65, 65)
        pose = Pose(0.05 + 0.1 * 32, 0.05 + 0.1 * 32, 0.0)
        update_from_sweep(g, pose, [echo(0.0, None)],
                          SensorParams(max_range=3.0), MODEL)
        nz = g.cells[g.cells != 0.0]
        assert len(nz) == 30
        assert np.all(nz == MODEL.l_free)

    def test_matches_oracle_on_random_sweeps(self):
        rng = np.random.default_rng(31)
        world = World(bounds=Bounds(-5, -5, 5, 5),
                      obstacles=(Segment(1.5, -4, 1.5, 4),
                                 Segment(-2, -1.5, 2, -1.5)))
        params = SensorParams(max_range=3.0, beam_count=31)
        for _ in range(10):
            pose = Pose(rng.uniform(-1, 1), rng.uniform(-0.5, 1),
                        rng.uniform(-math.pi, math.pi))
            g = new_grid((-4.05, -4.05), 0.15, 54, 54)
            g.cells[:] = rng.uniform(-1, 1, size=g.cells.shape)
            before = g.copy()
            measurements = sweep(world, pose, params, rng)
            update_from_sweep(g, pose, measurements, params, MODEL)
            want = expected_sweep_update(before, pose, measurements, params, MODEL)
            np.testing.assert_array_equal(g.cells, want)

    def test_untouched_cells_stay_exactly_unknown(self):
        g = new_grid((0, 0), 0.1, 41, 41)
        pose = Pose(2.05, 2.05, 0.0)
        update_from_sweep(g, pose, [echo(0.0, 1.0)],
                          SensorParams(max_range=3.0), MODEL)
        assert np.all(g.cells[:20, :] == 0.0)
        assert np.all(g.cells[21:, :] == 0.0)

    def test_clamping_under_repeated_updates(self):
        g = new_grid((0, 0), 0.1, 21, 21)
        pose = Pose(1.05, 1.05, 0.0)
        for _ in range(40):
            update_from_sweep(g, pose, [echo(0.0, 1.0)],
                              SensorParams(max_range=3.0), MODEL)
        assert np.all(g.cells <= g.l_max)
        assert np.all(g.cells >= g.l_min)
        assert g.cells[10, 20] == g.l_max
        assert g.cells[10, 12] == g.l_min

    def test_bearing_outside_sweep_range_rejected(self):
        g = new_grid((0, 0), 0.1, 11, 11)
        with pytest.raises(ValueError):
            update_from_sweep(g, Pose(0.55, 0.55, 0),
                              [echo(2.0, 1.0)], SensorParams(), MODEL)

    def test_pose_outside_grid_rejected(self):
        g = new_grid((0, 0), 0.1, 11, 11)
        with pytest.raises(ValueError):
            update_from_sweep(g, Pose(5.0, 5.0, 0), [], SensorParams(), MODEL)

    def test_cone_mode_frees_off_axis_cells(self):
        params = SensorParams(max_range=3.0)
        ray_grid = new_grid((0, 0), 0.1, 41, 41)
        cone_grid = new_grid((0, 0), 0.1, 41, 41)
        pose = Pose(2.05, 2.05, 0.0)
        cone = SonarInverseModel(occupied_band=0.1, mode="cone")
        update_from_sweep(ray_grid, pose, [echo(0.0, 1.5)], params, MODEL)
        update_from_sweep(cone_grid, pose, [echo(0.0, 1.5)], params, cone)
        ray_touched = np.count_nonzero(ray_grid.cells)
        cone_touched = np.count_nonzero(cone_grid.cells)
        assert cone_touched > ray_touched
        # off-axis freeing is attenuated, never amplified
        off_axis = (cone_grid.cells < 0) & (ray_grid.cells == 0)
        assert np.all(cone_grid.cells[off_axis] >= cone.l_free)
        # the center line keeps its exact ray-mode occupied band
        assert cone_grid.cells[20, 35] == cone.l_occ


class TestWallScenario:
    def test_wall_cells_positive_free_cells_negative(self):
        # Noise-free 181-beam sweep against a wall 1 m ahead: wall-band
        # cells inside the hit fan turn positive, nearer on-ray cells
        # negative; nothing outside the fan changes. Checked cell-for-cell
        # against the traversal oracle.
        world = World(bounds=Bounds(-5, -5, 5, 5),
                      obstacles=(Segment(1.0, -4.9, 1.0, 4.9),))
        params = SensorParams(max_range=3.0, beam_count=181)
        pose = Pose(0.003, 0.007, 0.0)  # off-lattice on purpose
        g = new_grid((-3.1, -3.1), 0.1, 63, 63)
        measurements = sweep(world, pose, params, np.random.default_rng(0))
        update_from_sweep(g, pose, measurements, params, MODEL)

        want = expected_sweep_update(new_grid((-3.1, -3.1), 0.1, 63, 63),
                                     pose, measurements, params, MODEL)
        np.testing.assert_array_equal(g.cells, want)

        hits = [m for m in measurements if m.echo_time is not None]
        assert hits, "some beams must hit the wall"
        # Wall-band positivity holds where a beam through the cell both hits
        # the wall within range (|b| < acos(d/max_range) ~ 70.5 deg) and has
        # a band wide enough at that incidence to cover the half-cell offset
        # (band*cos(b) > res/2, i.e. |b| < 60 deg). Check inside 55 degrees.
        occupied_cone = math.radians(55.0)
        seen_positive = 0
        for iy in range(g.height):
            for ix in range(g.width):
                cx, cy = g.cell_center(ix, iy)
                l = g.cells[iy, ix]
                bearing = math.atan2(cy - pose.y, cx - pose.x)
                dist = math.hypot(cx - pose.x, cy - pose.y)
                in_fan = abs(bearing) <= math.pi / 2 and dist <= params.max_range
                if not in_fan and l != 0.0:
                    # only walk spillover of the boundary beams is tolerable
                    assert abs(bearing) <= math.pi / 2 + 0.02, (ix, iy, l)
                if abs(bearing) <= occupied_cone and abs(cx - 1.0) <= 0.1 \
                        and l != 0.0:
                    assert l > 0.0, (ix, iy, l)
                    seen_positive += 1
                if in_fan and cx < 0.85 and dist > 0.05 and l != 0.0:
                    assert l < 0.0, (ix, iy, l)
        assert seen_positive > 15


class TestFusion:
    def test_unknown_local_changes_nothing(self):
        g = new_grid((0, 0), 0.1, 30, 30)
        g.cells[:] = np.linspace(-2, 2, 900).reshape(30, 30)
        before = g.cells.copy()
        fuse_into_global(g, new_grid((0.5, 0.5), 0.1, 10, 10))
        np.testing.assert_array_equal(g.cells, before)

    def test_single_cell_additive_identity(self):
        g = new_grid((0, 0), 0.1, 30, 30)
        local = new_grid((1.0, 1.0), 0.1, 5, 5)
        local.cells[2, 3] = 0.85
        fuse_into_global(g, local)
        # local cell (3,2) center = (1.35, 1.25) -> global cell (13, 12)
        assert g.cells[12, 13] == 0.85
        assert np.count_nonzero(g.cells) == 1

    def test_repeated_fusion_clamps(self):
        g = new_grid((0, 0), 0.1, 10, 10)
        local = new_grid((0, 0), 0.1, 10, 10)
        local.cells[4, 4] = 0.85
        for _ in range(8):
            fuse_into_global(g, local)
        assert g.cells[4, 4] == 6.0  # 8 * 0.85 = 6.8, clamped to l_max

    def test_off_lattice_local_maps_by_centers(self):
        g = new_grid((0, 0), 0.1, 30, 30)
        local = new_grid((1.03, 0.52), 0.1, 3, 3)
        local.cells[0, 0] = 1.0
        fuse_into_global(g, local)
        # center (1.08, 0.57) lands in global cell (10, 5)
        assert g.cells[5, 10] == 1.0

    def test_disjoint_fusion_commutes(self):
        a = new_grid((0, 0), 0.1, 40, 40)
        b = new_grid((0, 0), 0.1, 40, 40)
        rng = np.random.default_rng(13)
        l1 = new_grid((0.2, 0.2), 0.1, 8, 8)
        l2 = new_grid((2.1, 2.1), 0.1, 8, 8)
        l1.cells[:] = rng.uniform(-1, 1, (8, 8))
        l2.cells[:] = rng.uniform(-1, 1, (8, 8))
        fuse_into_global(fuse_into_global(a, l1), l2)
        fuse_into_global(fuse_into_global(b, l2), l1)
        np.testing.assert_array_equal(a.cells, b.cells)

    def test_resolution_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fuse_into_global(new_grid((0, 0), 0.1, 10, 10),
                             new_grid((0, 0), 0.2, 5, 5))

    def test_extent_overflow_rejected(self):
        with pytest.raises(ValueError):
            fuse_into_global(new_grid((0, 0), 0.1, 10, 10),
                             new_grid((0.8, 0, ), 0.1, 5, 5))


class TestCodecs:
    def test_csv_roundtrip_bitwise(self, tmp_path):
        rng = np.random.default_rng(17)
        g = new_grid((-1.25, 3.5), 0.05, 20, 20)
        g.cells[:] = rng.uniform(-6, 6, (20, 20))
        path = tmp_path / "m.csv"
        save_map(g, path)
        back = load_map(path)
        assert (back.origin_x, back.origin_y) == (g.origin_x, g.origin_y)
        assert back.resolution == g.resolution
        assert (back.width, back.height) == (g.width, g.height)
        np.testing.assert_array_equal(back.cells, g.cells)

    def test_unknown_grid_pgm_midpoint(self):
        g = new_grid((0, 0), 0.1, 4, 4)
        assert np.all(pgm_pixels(g) == 128)

    def test_occupied_cell_pgm_value(self):
        g = new_grid((0, 0), 0.1, 1, 1)
        g.cells[0, 0] = 6.0  # p ~ 0.99753 -> pixel round(255 * 0.00247) = 1
        assert pgm_pixels(g)[0, 0] == 1

    def test_pgm_roundtrip_within_one_level(self, tmp_path):
        rng = np.random.default_rng(19)
        for i in range(20):
            g = new_grid((rng.uniform(-5, 5), rng.uniform(-5, 5)), 0.1, 12, 9)
            g.cells[:] = rng.uniform(-6, 6, (9, 12))
            path = tmp_path / f"m{i}.pgm"
            save_map(g, path)
            back = load_map(path)
            assert back.resolution == g.resolution
            diff = pgm_pixels(back).astype(int) - pgm_pixels(g).astype(int)
            assert np.abs(diff).max() <= 1

    def test_pgm_preserves_georeference(self, tmp_path):
        g = new_grid((-3.5, 2.25), 0.1, 5, 6)
        path = tmp_path / "m.pgm"
        save_map(g, path)
        back = load_map(path)
        assert (back.origin_x, back.origin_y) == (-3.5, 2.25)

    def test_bad_extension_rejected(self, tmp_path):
        g = new_grid((0, 0), 0.1, 2, 2)
        with pytest.raises(ValueError):
            save_map(g, tmp_path / "m.txt")

    def test_malformed_csv_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("not,a,map\n")
        with pytest.raises(ValueError, match="header"):
            load_map(path)

    def test_truncated_csv_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("occgrid,0.0,0.0,0.1,3,3\n1.0,2.0,3.0\n")
        with pytest.raises(ValueError, match="truncated"):
            load_map(path)

    def test_missing_file_has_path_context(self, tmp_path):
        with pytest.raises(OSError, match="nope.csv"):
            load_map(tmp_path / "nope.csv")
