"""File formats: pose batches, configs, grid/plan/manifest/report exports.

Everything here is plain text — JSON, JSON Lines, or CSV — with metres for
positions and degrees for angles. Writers are deterministic functions of
their inputs (keys sorted, shortest round-trip float repr, no timestamps),
so rewriting unchanged data reproduces the file byte for byte. Writers
also go through a temp-file rename, so a failed write never leaves a
truncated file behind.

Pose records use ``position_m`` plus either ``quaternion_wxyz`` (scalar
first) or ``yaw_deg``/optional ``pitch_deg``; writers always emit the
quaternion form.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from ptzscan.evaluation import SOURCE_EXTERNAL, PoseEstimate
from ptzscan.geometry import CameraPose, quat_from_yaw_pitch
from ptzscan.losses import LossWeights, PoseSample
from ptzscan.pantilt import PanTiltGrid
from ptzscan.planner import ScanPlan, ScanPoint, SectionPlan
from ptzscan.randomizer import (
    DatasetManifest,
    DeploymentBoundary,
    MaterialColor,
    RandomizationSample,
    SplitSizes,
    TexturePlacement,
)
from ptzscan.simulator import PropagationStudy, SimulationReport
from ptzscan.surface import SectionSpec, SurfaceGrid

__all__ = [
    "FormatError",
    "BatchSample",
    "pose_to_record",
    "record_to_pose",
    "write_sample_batch",
    "read_sample_batch",
    "load_external_predictions",
    "write_section_config",
    "read_section_config",
    "write_boundary_config",
    "read_boundary_config",
    "write_grid_csv",
    "read_grid_csv",
    "write_pantilt_csv",
    "write_plan_json",
    "read_plan_json",
    "write_plan_csv",
    "write_manifest_json",
    "read_manifest_json",
    "write_report_json",
    "write_report_csv",
    "write_propagation_json",
    "format_stats",
    "write_stats_report",
    "write_stats_csv",
]


class FormatError(Exception):
    """A file exists but its contents do not parse as the expected format."""


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write_text(path: Union[str, Path], text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load_json(path: Union[str, Path]):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc


def _floats(values, n, context) -> list[float]:
    try:
        out = [float(v) for v in values]
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{context}: expected numbers, got {values!r}") from exc
    if len(out) != n:
        raise FormatError(f"{context}: expected {n} values, got {len(out)}")
    return out


# ---------------------------------------------------------------------------
# Pose records and batch sample files (JSON Lines)

def pose_to_record(pose: CameraPose) -> dict:
    return {
        "position_m": [float(v) for v in pose.position],
        "quaternion_wxyz": [float(v) for v in pose.orientation],
    }


def record_to_pose(record: dict, context: str = "pose record") -> CameraPose:
    if not isinstance(record, dict) or "position_m" not in record:
        raise FormatError(f"{context}: missing 'position_m'")
    position = np.array(_floats(record["position_m"], 3, context))
    if "quaternion_wxyz" in record:
        quat = np.array(_floats(record["quaternion_wxyz"], 4, context))
    elif "yaw_deg" in record:
        quat = quat_from_yaw_pitch(
            float(record["yaw_deg"]), float(record.get("pitch_deg", 0.0))
        )
    else:
        raise FormatError(f"{context}: need 'quaternion_wxyz' or 'yaw_deg'")
    try:
        return CameraPose(position, quat)
    except ValueError as exc:
        raise FormatError(f"{context}: {exc}") from exc


@dataclass(frozen=True)
class BatchSample:
    """One line of a batch file: a pose pair plus optional loss weights."""

    sample: PoseSample
    weights: Optional[LossWeights] = None


def write_sample_batch(
    path: Union[str, Path],
    samples: Sequence[PoseSample],
    weights: Optional[Sequence[Optional[LossWeights]]] = None,
) -> None:
    if weights is not None and len(weights) != len(samples):
        raise ValueError("weights, when given, must align with samples")
    lines = []
    for k, sample in enumerate(samples):
        record = {
            "true": pose_to_record(sample.true_pose),
            "predicted": {
                "position_m": [float(v) for v in sample.predicted_position],
                "quaternion_wxyz": [float(v) for v in sample.predicted_orientation_raw],
            },
        }
        w = weights[k] if weights is not None else None
        if w is not None:
            record["weights"] = {"s_x": w.s_x, "s_q": w.s_q, "s_c": w.s_c}
        lines.append(json.dumps(record, sort_keys=True))
    _write_text(path, "\n".join(lines) + ("\n" if lines else ""))


def read_sample_batch(path: Union[str, Path]) -> list[BatchSample]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        context = f"{path}:{lineno}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{context}: invalid JSON ({exc})") from exc
        if "true" not in record or "predicted" not in record:
            raise FormatError(f"{context}: need 'true' and 'predicted' records")
        true_pose = record_to_pose(record["true"], f"{context}: true")
        pred = record["predicted"]
        if not isinstance(pred, dict) or "position_m" not in pred:
            raise FormatError(f"{context}: predicted record missing 'position_m'")
        position = np.array(_floats(pred["position_m"], 3, f"{context}: predicted"))
        if "quaternion_wxyz" in pred:
            raw = np.array(_floats(pred["quaternion_wxyz"], 4, f"{context}: predicted"))
        elif "yaw_deg" in pred:
            raw = quat_from_yaw_pitch(float(pred["yaw_deg"]), float(pred.get("pitch_deg", 0.0)))
        else:
            raise FormatError(f"{context}: predicted needs 'quaternion_wxyz' or 'yaw_deg'")
        try:
            sample = PoseSample(true_pose, position, raw)
        except ValueError as exc:
            raise FormatError(f"{context}: {exc}") from exc
        w = record.get("weights")
        weights = None
        if w is not None:
            try:
                weights = LossWeights(
                    s_x=float(w.get("s_x", 0.0)),
                    s_q=float(w.get("s_q", 0.0)),
                    s_c=float(w.get("s_c", 0.0)),
                )
            except (AttributeError, TypeError, ValueError) as exc:
                raise FormatError(f"{context}: bad weights ({exc})") from exc
        out.append(BatchSample(sample=sample, weights=weights))
    return out


def load_external_predictions(
    path: Union[str, Path],
) -> tuple[list[PoseEstimate], list[CameraPose]]:
    """Read a batch file as (predictions, ground truths) for evaluation.

    Predicted orientations are normalized into estimates tagged with the
    external-file source.
    """
    predictions, truths = [], []
    for batch in read_sample_batch(path):
        sample = batch.sample
        predictions.append(
            PoseEstimate(
                position=sample.predicted_position,
                orientation=sample.predicted_orientation,
                source=SOURCE_EXTERNAL,
            )
        )
        truths.append(sample.true_pose)
    return predictions, truths


# ---------------------------------------------------------------------------
# Section and boundary configs (JSON)

def write_section_config(path: Union[str, Path], sections: Sequence[SectionSpec]) -> None:
    payload = {
        "sections": [
            {
                "name": s.name,
                "kind": s.kind,
                "box_min_m": list(s.box_min),
                "box_max_m": list(s.box_max),
                "relevance": s.relevance,
            }
            for s in sections
        ]
    }
    _write_text(path, _dump_json(payload))


def read_section_config(path: Union[str, Path]) -> list[SectionSpec]:
    payload = _load_json(path)
    if not isinstance(payload, dict) or not isinstance(payload.get("sections"), list):
        raise FormatError(f"{path}: expected an object with a 'sections' list")
    out = []
    for k, entry in enumerate(payload["sections"]):
        context = f"{path}: sections[{k}]"
        if not isinstance(entry, dict):
            raise FormatError(f"{context}: expected an object")
        try:
            out.append(
                SectionSpec(
                    name=str(entry["name"]),
                    kind=str(entry["kind"]),
                    box_min=tuple(_floats(entry["box_min_m"], 3, context)),
                    box_max=tuple(_floats(entry["box_max_m"], 3, context)),
                    relevance=str(entry.get("relevance", "back-half")),
                )
            )
        except KeyError as exc:
            raise FormatError(f"{context}: missing field {exc}") from exc
        except ValueError as exc:
            raise FormatError(f"{context}: {exc}") from exc
    return out


def write_boundary_config(path: Union[str, Path], boundary: DeploymentBoundary) -> None:
    payload = {
        "quadrant": boundary.quadrant,
        "x_range_m": list(boundary.x_range),
        "y_range_m": list(boundary.y_range),
        "height_range_m": list(boundary.height_range),
        "yaw_window_deg": boundary.yaw_window_deg,
        "tilt_center_deg": boundary.tilt_center_deg,
        "tilt_tolerance_deg": boundary.tilt_tolerance_deg,
    }
    _write_text(path, _dump_json(payload))


def read_boundary_config(path: Union[str, Path]) -> DeploymentBoundary:
    payload = _load_json(path)
    if not isinstance(payload, dict):
        raise FormatError(f"{path}: expected a JSON object")
    try:
        return DeploymentBoundary(
            quadrant=int(payload["quadrant"]),
            x_range=tuple(_floats(payload["x_range_m"], 2, str(path))),
            y_range=tuple(_floats(payload["y_range_m"], 2, str(path))),
            height_range=tuple(_floats(payload["height_range_m"], 2, str(path))),
            yaw_window_deg=float(payload.get("yaw_window_deg", 10.0)),
            tilt_center_deg=float(payload.get("tilt_center_deg", -18.0)),
            tilt_tolerance_deg=float(payload.get("tilt_tolerance_deg", 0.5)),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Grid / pan-tilt CSV exports

def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _cell_fields(value: float) -> str:
    return repr(float(value)) if math.isfinite(value) else ""


def write_grid_csv(path: Union[str, Path], grid: SurfaceGrid) -> None:
    rows = []
    nr, nc = grid.shape
    for i in range(nr):
        for j in range(nc):
            x, y, z = grid.points[i, j]
            ok = bool(grid.valid[i, j])
            rows.append(
                [i, j, _cell_fields(x), _cell_fields(y), _cell_fields(z), int(ok)]
            )
    _write_text(path, _csv_text(["i", "j", "x_m", "y_m", "z_m", "valid"], rows))


def read_grid_csv(path: Union[str, Path]) -> np.ndarray:
    """Grid export rows as a structured array (i, j, x, y, z, valid)."""
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise FormatError(f"{path}: empty file") from None
    if header != ["i", "j", "x_m", "y_m", "z_m", "valid"]:
        raise FormatError(f"{path}: unexpected header {header!r}")
    records = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 6:
            raise FormatError(f"{path}:{lineno}: expected 6 columns, got {len(row)}")
        try:
            records.append(
                (
                    int(row[0]),
                    int(row[1]),
                    float(row[2]) if row[2] else math.nan,
                    float(row[3]) if row[3] else math.nan,
                    float(row[4]) if row[4] else math.nan,
                    bool(int(row[5])),
                )
            )
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
    return np.array(
        records,
        dtype=[("i", int), ("j", int), ("x", float), ("y", float), ("z", float), ("valid", bool)],
    )


def write_pantilt_csv(path: Union[str, Path], u: PanTiltGrid) -> None:
    rows = []
    nr, nc = u.shape
    for i in range(nr):
        for j in range(nc):
            rows.append(
                [
                    i,
                    j,
                    _cell_fields(u.pans[i, j]),
                    _cell_fields(u.tilts[i, j]),
                    int(bool(u.valid[i, j])),
                ]
            )
    _write_text(path, _csv_text(["i", "j", "pan_deg", "tilt_deg", "valid"], rows))


# ---------------------------------------------------------------------------
# Plan exports

def write_plan_json(path: Union[str, Path], plan: ScanPlan) -> None:
    sequence = 0
    sections = []
    for section in plan.sections:
        points = []
        for p in section.points:
            points.append(
                {
                    "sequence": sequence,
                    "pan_deg": p.pan_deg,
                    "tilt_deg": p.tilt_deg,
                    "label_m": [float(v) for v in p.label],
                    "i": p.i,
                    "j": p.j,
                }
            )
            sequence += 1
        sections.append({"name": section.name, "kind": section.kind, "points": points})
    _write_text(path, _dump_json({"sections": sections}))


def read_plan_json(path: Union[str, Path]) -> ScanPlan:
    payload = _load_json(path)
    if not isinstance(payload, dict) or not isinstance(payload.get("sections"), list):
        raise FormatError(f"{path}: expected an object with a 'sections' list")
    sections = []
    for k, entry in enumerate(payload["sections"]):
        context = f"{path}: sections[{k}]"
        if not isinstance(entry, dict) or "name" not in entry or "kind" not in entry:
            raise FormatError(f"{context}: need 'name' and 'kind'")
        points = []
        for m, rec in enumerate(entry.get("points", [])):
            pcontext = f"{context}.points[{m}]"
            try:
                points.append(
                    ScanPoint(
                        pan_deg=float(rec["pan_deg"]),
                        tilt_deg=float(rec["tilt_deg"]),
                        label=np.array(_floats(rec["label_m"], 3, pcontext)),
                        section=str(entry["name"]),
                        i=int(rec["i"]),
                        j=int(rec["j"]),
                    )
                )
            except KeyError as exc:
                raise FormatError(f"{pcontext}: missing field {exc}") from exc
            except (TypeError, ValueError) as exc:
                raise FormatError(f"{pcontext}: {exc}") from exc
        sections.append(
            SectionPlan(name=str(entry["name"]), kind=str(entry["kind"]), points=tuple(points))
        )
    return ScanPlan(sections=tuple(sections))


def write_plan_csv(path: Union[str, Path], plan: ScanPlan) -> None:
    rows = []
    for sequence, p in enumerate(plan):
        rows.append(
            [
                p.section,
                sequence,
                repr(p.pan_deg),
                repr(p.tilt_deg),
                repr(float(p.label[0])),
                repr(float(p.label[1])),
                repr(float(p.label[2])),
            ]
        )
    header = ["section", "sequence", "pan_deg", "tilt_deg", "label_x_m", "label_y_m", "label_z_m"]
    _write_text(path, _csv_text(header, rows))


# ---------------------------------------------------------------------------
# Dataset manifests

def _sample_to_record(sample: RandomizationSample) -> dict:
    return {
        "position_m": [float(v) for v in sample.position],
        "yaw_deg": sample.yaw_deg,
        "pan_deg": sample.pan_deg,
        "tilt_deg": sample.tilt_deg,
        "colors": {
            name: {
                "ambient_rgb": list(color.ambient_rgb),
                "specular_rgb": list(color.specular_rgb),
            }
            for name, color in sample.colors.items()
        },
        "textures": {
            name: {
                "offset_u": tex.offset_u,
                "offset_v": tex.offset_v,
                "rotation_deg": tex.rotation_deg,
                "scale_u": tex.scale_u,
                "scale_v": tex.scale_v,
            }
            for name, tex in sample.textures.items()
        },
    }


def _record_to_sample(record: dict, context: str) -> RandomizationSample:
    try:
        colors = {
            name: MaterialColor(
                ambient_rgb=tuple(_floats(c["ambient_rgb"], 3, context)),
                specular_rgb=tuple(_floats(c["specular_rgb"], 3, context)),
            )
            for name, c in record["colors"].items()
        }
        textures = {
            name: TexturePlacement(
                offset_u=float(t["offset_u"]),
                offset_v=float(t["offset_v"]),
                rotation_deg=float(t["rotation_deg"]),
                scale_u=float(t["scale_u"]),
                scale_v=float(t["scale_v"]),
            )
            for name, t in record["textures"].items()
        }
        return RandomizationSample(
            position=np.array(_floats(record["position_m"], 3, context)),
            yaw_deg=float(record["yaw_deg"]),
            pan_deg=float(record["pan_deg"]),
            tilt_deg=float(record["tilt_deg"]),
            colors=colors,
            textures=textures,
        )
    except KeyError as exc:
        raise FormatError(f"{context}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{context}: {exc}") from exc


def write_manifest_json(path: Union[str, Path], manifest: DatasetManifest) -> None:
    payload = {
        "header": {
            "generator": manifest.generator,
            "seed": manifest.seed,
            "hfov_deg": manifest.hfov_deg,
            "sizes": {
                "train": manifest.sizes.train,
                "val": manifest.sizes.val,
                "test": manifest.sizes.test,
            },
            "boundary": {
                "quadrant": manifest.boundary.quadrant,
                "x_range_m": list(manifest.boundary.x_range),
                "y_range_m": list(manifest.boundary.y_range),
                "height_range_m": list(manifest.boundary.height_range),
                "yaw_window_deg": manifest.boundary.yaw_window_deg,
                "tilt_center_deg": manifest.boundary.tilt_center_deg,
                "tilt_tolerance_deg": manifest.boundary.tilt_tolerance_deg,
            },
        },
        "samples": [_sample_to_record(s) for s in manifest.samples],
        "splits": list(manifest.splits),
    }
    _write_text(path, _dump_json(payload))


def read_manifest_json(path: Union[str, Path]) -> DatasetManifest:
    payload = _load_json(path)
    if not isinstance(payload, dict) or "header" not in payload:
        raise FormatError(f"{path}: expected an object with a 'header'")
    header = payload["header"]
    try:
        sizes = SplitSizes(
            train=int(header["sizes"]["train"]),
            val=int(header["sizes"]["val"]),
            test=int(header["sizes"]["test"]),
        )
        b = header["boundary"]
        boundary = DeploymentBoundary(
            quadrant=int(b["quadrant"]),
            x_range=tuple(_floats(b["x_range_m"], 2, str(path))),
            y_range=tuple(_floats(b["y_range_m"], 2, str(path))),
            height_range=tuple(_floats(b["height_range_m"], 2, str(path))),
            yaw_window_deg=float(b["yaw_window_deg"]),
            tilt_center_deg=float(b["tilt_center_deg"]),
            tilt_tolerance_deg=float(b["tilt_tolerance_deg"]),
        )
        samples = tuple(
            _record_to_sample(rec, f"{path}: samples[{k}]")
            for k, rec in enumerate(payload["samples"])
        )
        return DatasetManifest(
            seed=int(header["seed"]),
            sizes=sizes,
            boundary=boundary,
            samples=samples,
            splits=tuple(str(s) for s in payload["splits"]),
            hfov_deg=float(header["hfov_deg"]),
            generator=str(header["generator"]),
        )
    except KeyError as exc:
        raise FormatError(f"{path}: missing field {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Simulation reports and evaluation stats

def report_to_dict(report: SimulationReport) -> dict:
    def _maybe(value):
        return None if value is None or not math.isfinite(value) else value

    return {
        "sections": [
            {
                "name": s.name,
                "image_count": s.image_count,
                "coverage": s.coverage,
                "overlaps": list(s.overlaps),
            }
            for s in report.sections
        ],
        "label_error_median_m": _maybe(report.label_error_median_m),
        "label_error_rmse_m": _maybe(report.label_error_rmse_m),
        "missed_count": report.missed_count,
        "image_count": report.image_count,
        "images": [
            {
                "sequence": im.sequence,
                "section": im.section,
                "pan_deg": im.pan_deg,
                "tilt_deg": im.tilt_deg,
                "label_m": [float(v) for v in im.label],
                "hit_m": None if im.hit is None else [float(v) for v in im.hit],
                "error_m": _maybe(im.error_m),
                "missed": im.missed,
            }
            for im in report.images
        ],
    }


def write_report_json(path: Union[str, Path], report: SimulationReport) -> None:
    _write_text(path, _dump_json(report_to_dict(report)))


def write_report_csv(path: Union[str, Path], report: SimulationReport) -> None:
    rows = []
    for im in report.images:
        hit = ["", "", ""] if im.hit is None else [repr(float(v)) for v in im.hit]
        rows.append(
            [
                im.sequence,
                im.section,
                repr(im.pan_deg),
                repr(im.tilt_deg),
                repr(float(im.label[0])),
                repr(float(im.label[1])),
                repr(float(im.label[2])),
                *hit,
                "" if im.error_m is None else repr(im.error_m),
            ]
        )
    header = [
        "sequence",
        "section",
        "pan_deg",
        "tilt_deg",
        "label_x_m",
        "label_y_m",
        "label_z_m",
        "hit_x_m",
        "hit_y_m",
        "hit_z_m",
        "error_m",
    ]
    _write_text(path, _csv_text(header, rows))


def write_propagation_json(path: Union[str, Path], study: PropagationStudy) -> None:
    def _maybe(value):
        return None if not math.isfinite(value) else value

    payload = {
        "seed": study.seed,
        "sigma_pos_m": study.sigma_pos_m,
        "sigma_yaw_deg": study.sigma_yaw_deg,
        "n_draws": len(study.draws),
        "error_median_m": _maybe(study.error_median_m),
        "error_rmse_m": _maybe(study.error_rmse_m),
        "draws": [
            {
                "draw": d.draw,
                "position_error_m": d.position_error_m,
                "yaw_error_deg": d.yaw_error_deg,
                "image_count": d.image_count,
                "label_error_median_m": _maybe(d.label_error_median_m),
                "label_error_rmse_m": _maybe(d.label_error_rmse_m),
                "coverage_min": d.coverage_min,
                "missed_count": d.missed_count,
            }
            for d in study.draws
        ],
    }
    _write_text(path, _dump_json(payload))


def format_stats(stats) -> str:
    """Flat key=value lines for pose-error statistics."""
    lines = [
        f"n={stats.n}",
        f"median_position_m={stats.median_position!r}",
        f"rmse_position_m={stats.rmse_position!r}",
        f"median_orientation_deg={stats.median_orientation!r}",
        f"rmse_orientation_deg={stats.rmse_orientation!r}",
    ]
    return "\n".join(lines) + "\n"


def write_stats_report(path: Union[str, Path], stats) -> None:
    _write_text(path, format_stats(stats))


def write_stats_csv(path: Union[str, Path], stats) -> None:
    header = [
        "n",
        "median_position_m",
        "rmse_position_m",
        "median_orientation_deg",
        "rmse_orientation_deg",
    ]
    row = [
        stats.n,
        repr(stats.median_position),
        repr(stats.rmse_position),
        repr(stats.median_orientation),
        repr(stats.rmse_orientation),
    ]
    _write_text(path, _csv_text(header, [row]))
