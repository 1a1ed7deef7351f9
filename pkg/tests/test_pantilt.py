"""Tests for Cartesian-to-pan/tilt conversion and quadrant setup."""

import math

import numpy as np
import pytest

from ptzscan.geometry import vec3, wrap_degrees
from ptzscan.pantilt import (
    QUADRANT_PAN_OFFSETS,
    PanTilt,
    PanTiltGrid,
    QuadrantSetup,
    YawToleranceWarning,
    compute_alpha,
    direction_from_pantilt,
    grid_to_pantilt,
    point_to_pantilt,
)
from ptzscan.surface import PointCloud, SectionSpec, interpolate_section


class TestComputeAlpha:
    def test_nominal_quadrant_three(self):
        setup = QuadrantSetup(3, 20.0, vec3(-7, 2, 7))
        assert compute_alpha(setup) == 0.0

    def test_five_degree_offset(self):
        setup = QuadrantSetup(3, 25.0, vec3(-7, 2, 7))
        assert compute_alpha(setup) == pytest.approx(5.0, abs=1e-12)

    def test_quadrant_four_nominal(self):
        setup = QuadrantSetup(4, -10.0, vec3(-7, -2, 7))
        assert compute_alpha(setup) == 0.0

    def test_all_nominal_offsets(self):
        for q, beta in QUADRANT_PAN_OFFSETS.items():
            assert compute_alpha(QuadrantSetup(q, beta, vec3(0, 0, 0))) == 0.0

    def test_out_of_tolerance_warns(self):
        setup = QuadrantSetup(1, 25.0, vec3(0, 0, 0))
        with pytest.warns(YawToleranceWarning):
            assert compute_alpha(setup) == pytest.approx(15.0)

    def test_within_tolerance_silent(self, recwarn):
        compute_alpha(QuadrantSetup(2, -12.0, vec3(0, 0, 0)))
        assert not [w for w in recwarn if issubclass(w.category, YawToleranceWarning)]

    def test_invalid_quadrant(self):
        with pytest.raises(ValueError):
            QuadrantSetup(5, 0.0, vec3(0, 0, 0))


class TestPointToPanTilt:
    def test_straight_ahead(self):
        pt = point_to_pantilt(vec3(10, 0, 0), vec3(0, 0, 0), 0.0)
        assert pt.pan_deg == 0.0
        assert pt.tilt_deg == 0.0

    def test_diagonal_with_alpha(self):
        pt = point_to_pantilt(vec3(10, 10, 0), vec3(0, 0, 0), 5.0)
        assert pt.pan_deg == pytest.approx(40.0, abs=1e-12)
        assert pt.tilt_deg == 0.0

    def test_downward_tilt(self):
        pt = point_to_pantilt(vec3(10, 0, -10), vec3(0, 0, 0), 0.0)
        assert pt.tilt_deg == pytest.approx(-45.0, abs=1e-12)

    def test_zero_displacement_rejected(self):
        with pytest.raises(ValueError):
            point_to_pantilt(vec3(1, 2, 3), vec3(1, 2, 3), 0.0)

    def test_straight_down_is_negative_ninety(self):
        pt = point_to_pantilt(vec3(0, 0, -5), vec3(0, 0, 0), 0.0)
        assert pt.tilt_deg == -90.0

    def test_round_trip_ray_passes_through_point(self):
        rng = np.random.default_rng(47)
        for _ in range(2000):
            cam = vec3(*rng.uniform(-10, 10, 3))
            target = vec3(*rng.uniform(-10, 10, 3))
            if np.allclose(cam, target):
                continue
            alpha = rng.uniform(-15, 15)
            pt = point_to_pantilt(target, cam, alpha)
            d = direction_from_pantilt(pt.pan_deg, pt.tilt_deg, alpha)
            r = target - cam
            miss = np.linalg.norm(r - np.dot(r, d) * d)
            assert miss < 1e-9

    def test_alpha_equivariance_is_exact(self):
        # Pan depends on alpha only through one wrapped subtraction, so
        # shifting by alpha reproduces the alpha = 0 pan bit-for-bit.
        rng = np.random.default_rng(53)
        for _ in range(2000):
            cam = vec3(*rng.uniform(-10, 10, 3))
            target = vec3(*rng.uniform(-10, 10, 3))
            if np.allclose(cam[:2], target[:2]):
                continue
            alpha = rng.uniform(-180, 180)
            shifted = point_to_pantilt(target, cam, alpha)
            base = point_to_pantilt(target, cam, 0.0)
            assert shifted.pan_deg == wrap_degrees(base.pan_deg - alpha)
            assert shifted.tilt_deg == base.tilt_deg


class TestPanTiltType:
    def test_range_validation(self):
        with pytest.raises(ValueError):
            PanTilt(200.0, 0.0)
        with pytest.raises(ValueError):
            PanTilt(0.0, 95.0)
        with pytest.raises(ValueError):
            PanTilt(-180.0, 0.0)

    def test_boundary_pan(self):
        assert PanTilt(180.0, 0.0).pan_deg == 180.0


class TestGridToPanTilt:
    def make_grid(self, pts: np.ndarray):
        spec = SectionSpec("s", "fuselage", (-100, -100, -100), (100, 100, 100))
        return interpolate_section(PointCloud(pts), spec)

    def test_matches_scalar_conversion(self):
        rng = np.random.default_rng(59)
        xy = rng.uniform([0.0, 0.0], [2.0, 4.0], size=(200, 2))
        z = 6.0 + 0.2 * xy[:, 0] - 0.1 * xy[:, 1]
        grid = self.make_grid(np.column_stack([xy, z]))
        setup = QuadrantSetup(3, 24.0, vec3(-6.0, 1.0, 7.0))
        u = grid_to_pantilt(grid, setup)
        assert u.shape == grid.shape
        np.testing.assert_array_equal(u.valid, grid.valid)
        alpha = compute_alpha(setup)
        for i in range(grid.shape[0]):
            for j in range(grid.shape[1]):
                cell = u.cell(i, j)
                if cell is None:
                    assert not grid.valid[i, j]
                    continue
                expected = point_to_pantilt(grid.points[i, j], setup.camera_position, alpha)
                assert cell.pan_deg == expected.pan_deg
                assert cell.tilt_deg == expected.tilt_deg

    def test_elevated_camera_sees_negative_tilts(self):
        # Camera mounted well above a low horizontal patch: every present
        # cell should need a downward tilt.
        rng = np.random.default_rng(61)
        xy = rng.uniform([-2.0, 0.0], [0.0, 10.0], size=(400, 2))
        z = 2.0 + np.sqrt(np.clip(4.0 - xy[:, 0] ** 2, 0.0, None))
        grid = self.make_grid(np.column_stack([xy, z]))
        setup = QuadrantSetup(3, 20.0, vec3(-7.0, 2.0, 7.0))
        u = grid_to_pantilt(grid, setup)
        assert np.all(u.tilts[u.valid] < 0.0)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(ValueError):
            PanTiltGrid(np.zeros((2, 2)), np.zeros((2, 3)), np.ones((2, 2), dtype=bool))

    def test_out_of_range_cell_raises(self):
        u = PanTiltGrid(np.zeros((2, 2)), np.zeros((2, 2)), np.ones((2, 2), dtype=bool))
        with pytest.raises(IndexError):
            u.cell(2, 0)
