"""Tests for file formats: batches, configs, grids, plans, manifests."""

import numpy as np
import pytest

from ptzscan.evaluation import SOURCE_EXTERNAL, evaluate
from ptzscan.formats import (
    FormatError,
    format_stats,
    load_external_predictions,
    pose_to_record,
    read_boundary_config,
    read_grid_csv,
    read_manifest_json,
    read_plan_json,
    read_sample_batch,
    read_section_config,
    record_to_pose,
    write_boundary_config,
    write_grid_csv,
    write_manifest_json,
    write_pantilt_csv,
    write_plan_csv,
    write_plan_json,
    write_report_csv,
    write_report_json,
    write_sample_batch,
    write_section_config,
    write_stats_report,
)
from ptzscan.geometry import CameraPose, quat_from_yaw_pitch
from ptzscan.losses import LossWeights, PoseSample
from ptzscan.pantilt import PanTiltGrid
from ptzscan.planner import ScanPlan, ScanPoint, SectionPlan
from ptzscan.randomizer import DeploymentBoundary, SplitSizes, generate_manifest
from ptzscan.simulator import ImageResult, SectionReport, SimulationReport


def random_pose(rng):
    quat = rng.normal(size=4)
    quat /= np.linalg.norm(quat)
    return CameraPose(rng.normal(size=3), quat)


def make_samples(n, seed=0):
    rng = np.random.default_rng(seed)
    samples = []
    for _ in range(n):
        samples.append(
            PoseSample(
                true_pose=random_pose(rng),
                predicted_position=rng.normal(size=3),
                predicted_orientation_raw=rng.normal(size=4) * 2.0,
            )
        )
    return samples


class TestPoseRecords:
    def test_round_trip_is_bitwise(self):
        pose = CameraPose(np.array([-9.5, 13.0, 6.75]), quat_from_yaw_pitch(20.0, -5.0))
        back = record_to_pose(pose_to_record(pose))
        np.testing.assert_array_equal(back.position, pose.position)
        np.testing.assert_array_equal(back.orientation, pose.orientation)

    def test_yaw_variant(self):
        record = {"position_m": [1.0, 2.0, 3.0], "yaw_deg": 20.0}
        pose = record_to_pose(record)
        np.testing.assert_array_equal(pose.orientation, quat_from_yaw_pitch(20.0))

    def test_missing_orientation_rejected(self):
        with pytest.raises(FormatError, match="quaternion_wxyz"):
            record_to_pose({"position_m": [0.0, 0.0, 0.0]})

    def test_wrong_arity_rejected(self):
        with pytest.raises(FormatError, match="expected 3 values"):
            record_to_pose({"position_m": [0.0, 1.0], "yaw_deg": 0.0})


class TestSampleBatch:
    def test_round_trip(self, tmp_path):
        samples = make_samples(5, seed=1)
        weights = [LossWeights(0.1, -0.2, 0.3), None, LossWeights(), None, None]
        path = tmp_path / "batch.jsonl"
        write_sample_batch(path, samples, weights)
        back = read_sample_batch(path)
        assert len(back) == 5
        for orig, got, w in zip(samples, back, weights):
            np.testing.assert_array_equal(got.sample.predicted_position, orig.predicted_position)
            np.testing.assert_array_equal(
                got.sample.predicted_orientation_raw, orig.predicted_orientation_raw
            )
            np.testing.assert_array_equal(
                got.sample.true_pose.position, orig.true_pose.position
            )
            assert got.weights == w

    def test_empty_batch(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        write_sample_batch(path, [])
        assert read_sample_batch(path) == []

    def test_bad_line_reports_location(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"true": {}}\nnot json\n')
        with pytest.raises(FormatError, match="bad.jsonl:1"):
            read_sample_batch(path)

    def test_rewrite_is_byte_identical(self, tmp_path):
        samples = make_samples(3, seed=2)
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        write_sample_batch(a, samples)
        write_sample_batch(b, samples)
        assert a.read_bytes() == b.read_bytes()


class TestExternalPredictions:
    def test_load_and_evaluate(self, tmp_path):
        samples = make_samples(8, seed=3)
        path = tmp_path / "pred.jsonl"
        write_sample_batch(path, samples)
        predictions, truths = load_external_predictions(path)
        assert len(predictions) == len(truths) == 8
        assert all(p.source == SOURCE_EXTERNAL for p in predictions)
        for p in predictions:
            assert np.linalg.norm(p.orientation) == pytest.approx(1.0, abs=1e-12)
        stats = evaluate(predictions, truths)
        assert stats.n == 8


class TestSectionConfig:
    def test_round_trip(self, tmp_path):
        sections = [
            {"name": "fuselage", "kind": "fuselage", "lo": (-2.0, 9.9, 0.0), "hi": (0.1, 20.1, 5.0)},
            {"name": "fin", "kind": "tail", "lo": (-1.0, 18.0, 4.0), "hi": (1.0, 20.5, 9.0)},
        ]
        from ptzscan.surface import SectionSpec

        specs = [
            SectionSpec(name=s["name"], kind=s["kind"], box_min=s["lo"], box_max=s["hi"])
            for s in sections
        ]
        path = tmp_path / "sections.json"
        write_section_config(path, specs)
        back = read_section_config(path)
        assert [s.name for s in back] == ["fuselage", "fin"]
        assert back[0].box_min == specs[0].box_min
        assert back[1].interpolated_coordinate == "x-over-yz"

    def test_unknown_kind_rejected(self, tmp_path):
        path = tmp_path / "sections.json"
        path.write_text(
            '{"sections": [{"name": "a", "kind": "nose",'
            ' "box_min_m": [0,0,0], "box_max_m": [1,1,1]}]}'
        )
        with pytest.raises(FormatError, match="unknown section kind"):
            read_section_config(path)


class TestBoundaryConfig:
    def test_round_trip(self, tmp_path):
        boundary = DeploymentBoundary(
            quadrant=3, x_range=(-10.5, -8.5), y_range=(11.5, 14.5)
        )
        path = tmp_path / "boundary.json"
        write_boundary_config(path, boundary)
        assert read_boundary_config(path) == boundary

    def test_missing_field_rejected(self, tmp_path):
        path = tmp_path / "boundary.json"
        path.write_text('{"quadrant": 3, "x_range_m": [0, 1]}')
        with pytest.raises(FormatError, match="missing field"):
            read_boundary_config(path)


def toy_grid():
    from ptzscan.surface import SectionSpec, SurfaceGrid

    spec = SectionSpec("strip", "fuselage", (0.0, 0.0, 0.0), (1.0, 1.0, 5.0))
    row_values = np.array([0.0, 0.05])
    col_values = np.array([0.0, 0.05, 0.1])
    points = np.empty((2, 3, 3))
    points[..., 0] = row_values[:, None]
    points[..., 1] = col_values[None, :]
    points[..., 2] = 3.0
    valid = np.ones((2, 3), dtype=bool)
    valid[1, 2] = False
    points[~valid] = np.nan
    return SurfaceGrid(
        section=spec, row_values=row_values, col_values=col_values, points=points, valid=valid
    )


class TestGridCsv:
    def test_round_trip(self, tmp_path):
        grid = toy_grid()
        path = tmp_path / "grid.csv"
        write_grid_csv(path, grid)
        table = read_grid_csv(path)
        assert len(table) == 6
        assert table["valid"].sum() == 5
        row = table[(table["i"] == 0) & (table["j"] == 1)][0]
        assert (row["x"], row["y"], row["z"]) == (0.0, 0.05, 3.0)
        absent = table[(table["i"] == 1) & (table["j"] == 2)][0]
        assert not absent["valid"] and np.isnan(absent["z"])

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "grid.csv"
        path.write_text("a,b,c\n")
        with pytest.raises(FormatError, match="unexpected header"):
            read_grid_csv(path)

    def test_pantilt_csv_layout(self, tmp_path):
        u = PanTiltGrid(
            pans=np.array([[0.0, 1.5, np.nan]]),
            tilts=np.array([[-10.0, -11.0, np.nan]]),
            valid=np.array([[True, True, False]]),
        )
        path = tmp_path / "u.csv"
        write_pantilt_csv(path, u)
        lines = path.read_text().splitlines()
        assert lines[0] == "i,j,pan_deg,tilt_deg,valid"
        assert lines[1] == "0,0,0.0,-10.0,1"
        assert lines[3] == "0,2,,,0"


def toy_plan():
    points = tuple(
        ScanPoint(
            pan_deg=1.0 * k,
            tilt_deg=-20.0 + 0.5 * k,
            label=np.array([0.1 * k, 0.2 * k, 3.0]),
            section="fuselage",
            i=k,
            j=2 * k,
        )
        for k in range(4)
    )
    return ScanPlan(
        sections=(SectionPlan(name="fuselage", kind="fuselage", points=points),)
    )


class TestPlanExports:
    def test_json_round_trip(self, tmp_path):
        plan = toy_plan()
        path = tmp_path / "plan.json"
        write_plan_json(path, plan)
        back = read_plan_json(path)
        assert len(back) == len(plan)
        assert back.sections[0].kind == "fuselage"
        for orig, got in zip(plan, back):
            assert got.pan_deg == orig.pan_deg
            assert got.tilt_deg == orig.tilt_deg
            assert (got.i, got.j) == (orig.i, orig.j)
            np.testing.assert_array_equal(got.label, orig.label)

    def test_csv_layout(self, tmp_path):
        path = tmp_path / "plan.csv"
        write_plan_csv(path, toy_plan())
        lines = path.read_text().splitlines()
        assert lines[0] == (
            "section,sequence,pan_deg,tilt_deg,label_x_m,label_y_m,label_z_m"
        )
        assert len(lines) == 5
        assert lines[1].startswith("fuselage,0,0.0,-20.0,")

    def test_bad_points_rejected(self, tmp_path):
        path = tmp_path / "plan.json"
        path.write_text('{"sections": [{"name": "a", "kind": "fuselage", "points": [{}]}]}')
        with pytest.raises(FormatError, match="missing field"):
            read_plan_json(path)


class TestManifestJson:
    def test_round_trip_and_idempotence(self, tmp_path):
        boundary = DeploymentBoundary(quadrant=3, x_range=(-10.5, -8.5), y_range=(11.5, 14.5))
        manifest = generate_manifest(boundary, sizes=SplitSizes(train=4, val=2, test=1), seed=9)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_manifest_json(a, manifest)
        back = read_manifest_json(a)
        assert back.seed == manifest.seed
        assert back.generator == manifest.generator
        assert back.splits == manifest.splits
        assert back.boundary == manifest.boundary
        assert len(back.samples) == 7
        for orig, got in zip(manifest.samples, back.samples):
            np.testing.assert_array_equal(got.position, orig.position)
            assert got.yaw_deg == orig.yaw_deg
            assert got.colors == orig.colors
            assert got.textures == orig.textures
        write_manifest_json(b, back)
        assert a.read_bytes() == b.read_bytes()

    def test_header_required(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text('{"samples": []}')
        with pytest.raises(FormatError, match="header"):
            read_manifest_json(path)


class TestReportExports:
    def make_report(self):
        images = (
            ImageResult(
                sequence=0,
                section="fuselage",
                pan_deg=1.0,
                tilt_deg=-20.0,
                label=np.array([0.0, 1.0, 3.0]),
                hit=np.array([0.0, 1.0, 3.001]),
                error_m=0.001,
                missed=False,
            ),
            ImageResult(
                sequence=1,
                section="fuselage",
                pan_deg=2.0,
                tilt_deg=-20.0,
                label=np.array([0.0, 2.0, 3.0]),
                hit=None,
                error_m=None,
                missed=True,
            ),
        )
        section = SectionReport(
            name="fuselage", image_count=2, coverage=0.75, overlaps=(0.4,)
        )
        return SimulationReport(
            sections=(section,),
            images=images,
            label_error_median_m=0.001,
            label_error_rmse_m=0.001,
            missed_count=1,
        )

    def test_json_contains_summary_and_images(self, tmp_path):
        import json

        path = tmp_path / "report.json"
        write_report_json(path, self.make_report())
        payload = json.loads(path.read_text())
        assert payload["sections"][0]["coverage"] == 0.75
        assert payload["missed_count"] == 1
        assert payload["images"][1]["hit_m"] is None
        assert payload["images"][1]["error_m"] is None

    def test_csv_blank_cells_for_missed(self, tmp_path):
        path = tmp_path / "report.csv"
        write_report_csv(path, self.make_report())
        lines = path.read_text().splitlines()
        assert lines[0].startswith("sequence,section,pan_deg,tilt_deg,label_x_m")
        assert lines[2].endswith(",,,,")


class TestStatsReport:
    def test_flat_key_value_lines(self, tmp_path):
        samples = make_samples(4, seed=5)
        from ptzscan.evaluation import PoseEstimate

        predictions = [
            PoseEstimate(s.predicted_position, s.predicted_orientation, "external-file")
            for s in samples
        ]
        truths = [s.true_pose for s in samples]
        stats = evaluate(predictions, truths)
        text = format_stats(stats)
        lines = text.splitlines()
        assert lines[0] == "n=4"
        assert lines[1].startswith("median_position_m=")
        assert float(lines[2].split("=")[1]) == stats.rmse_position
        path = tmp_path / "stats.txt"
        write_stats_report(path, stats)
        assert path.read_text() == text
