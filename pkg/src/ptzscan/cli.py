"""Command-line front end: one subcommand per workflow phase.

``interpolate`` builds surface grids from a point cloud, ``plan`` turns
grids into a pan-tilt scan path, ``simulate`` executes a plan against
ground truth, ``randomize`` emits dataset manifests, ``evaluate`` scores
pose predictions, ``loss-check`` audits the training loss, and
``pipeline`` chains interpolate, plan, and simulate in one run.

Exit codes are categorised so scripts can react without parsing prose:
0 success, 2 missing/unreadable files, 3 unparsable content, 4 invalid
configuration, 5 computation failures on valid input, 1 anything else.
Every command is deterministic given its inputs and ``--seed``; rerunning
one rewrites byte-identical outputs. The only environment influence is
``PTZSCAN_LOG_LEVEL`` for logging verbosity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ptzscan import __version__
from ptzscan.evaluation import evaluate
from ptzscan.formats import (
    FormatError,
    format_stats,
    load_external_predictions,
    read_boundary_config,
    read_plan_json,
    read_sample_batch,
    read_section_config,
    record_to_pose,
    write_grid_csv,
    write_manifest_json,
    write_pantilt_csv,
    write_plan_csv,
    write_plan_json,
    write_propagation_json,
    write_report_csv,
    write_report_json,
    write_stats_csv,
    write_stats_report,
)
from ptzscan.geometry import (
    CameraPose,
    CylinderIntersectionError,
    CylinderModel,
    yaw_from_quaternion,
)
from ptzscan.losses import (
    InvalidSetupError,
    LossWeights,
    combined_loss,
    finite_difference_grad,
    optimal_log_variance,
)
from ptzscan.pantilt import QuadrantSetup, grid_to_pantilt
from ptzscan.planner import ScanConfig, plan_full
from ptzscan.randomizer import SplitSizes, generate_manifest
from ptzscan.simulator import SurfaceMissError, error_propagation, execute_plan
from ptzscan.surface import (
    DegenerateSectionError,
    PointCloudParseError,
    interpolate_section,
    load_point_cloud,
    section_points,
)

__all__ = [
    "RunConfig",
    "main",
    "EXIT_OK",
    "EXIT_INTERNAL",
    "EXIT_IO",
    "EXIT_PARSE",
    "EXIT_CONFIG",
    "EXIT_COMPUTE",
]

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_CONFIG = 4
EXIT_COMPUTE = 5

_CATEGORIES = {
    EXIT_IO: "io-error",
    EXIT_PARSE: "parse-error",
    EXIT_CONFIG: "config-error",
    EXIT_COMPUTE: "compute-error",
    EXIT_INTERNAL: "internal-error",
}

log = logging.getLogger("ptzscan")


class CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


@dataclass(frozen=True)
class RunConfig:
    """Resolved file paths plus scan parameters for one command run."""

    inputs: tuple[Path, ...]
    scan: ScanConfig = field(default_factory=ScanConfig)
    quadrant: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        missing = [str(p) for p in self.inputs if not p.is_file()]
        if missing:
            raise CliError(EXIT_IO, f"missing input file(s): {', '.join(missing)}")


def _scan_config(args) -> ScanConfig:
    return ScanConfig(hfov_deg=args.hfov_deg, vfov_deg=args.vfov_deg, mu=args.mu)


def _read_camera(path) -> CameraPose:
    text = Path(path).read_text()
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from exc
    return record_to_pose(record, str(path))


def _build_grids(cloud_path, fmt, sections_path):
    specs = read_section_config(sections_path)
    if not specs:
        raise CliError(EXIT_CONFIG, f"{sections_path}: no sections defined")
    cloud = load_point_cloud(cloud_path, fmt=fmt)
    grids = []
    for spec in specs:
        sub = section_points(cloud, spec)
        grids.append(interpolate_section(sub, spec))
    return grids


def _parse_cylinder(text: str) -> CylinderModel:
    try:
        radius, axis_height = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise CliError(
            EXIT_CONFIG, f"--cylinder expects 'radius,axis-height', got {text!r}"
        ) from exc
    return CylinderModel(axis_height=axis_height, radius=radius)


def _setup_for(pose: CameraPose, quadrant: int) -> QuadrantSetup:
    return QuadrantSetup(quadrant, yaw_from_quaternion(pose.orientation), pose.position)


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_interpolate(args) -> int:
    RunConfig(inputs=(Path(args.cloud), Path(args.sections)))
    grids = _build_grids(args.cloud, args.cloud_format, args.sections)
    out = _out_dir(args.out)
    for grid in grids:
        target = out / f"{grid.section.name}_grid.csv"
        write_grid_csv(target, grid)
        present = int(grid.valid.sum())
        print(f"{grid.section.name}: {grid.shape[0]}x{grid.shape[1]} grid, {present} present -> {target}")
    return EXIT_OK


def cmd_plan(args) -> int:
    RunConfig(
        inputs=(Path(args.cloud), Path(args.sections), Path(args.camera)),
        scan=_scan_config(args),
        quadrant=args.quadrant,
    )
    cfg = _scan_config(args)
    pose = _read_camera(args.camera)
    setup = _setup_for(pose, args.quadrant)
    grids = _build_grids(args.cloud, args.cloud_format, args.sections)
    triples = []
    pantilts = []
    for grid in grids:
        u = grid_to_pantilt(grid, setup)
        triples.append((u, grid, grid.section.kind))
        pantilts.append((grid.section.name, u))
    plan = plan_full(triples, cfg, args.quadrant)
    write_plan_json(args.out, plan)
    print(f"plan: {len(plan)} points across {len(plan.sections)} sections -> {args.out}")
    if args.csv:
        write_plan_csv(args.csv, plan)
    if args.export_pantilt:
        out = _out_dir(args.export_pantilt)
        for name, u in pantilts:
            write_pantilt_csv(out / f"{name}_pantilt.csv", u)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not args.draws and not args.plan:
        raise CliError(EXIT_CONFIG, "--plan is required unless --draws is given")
    inputs = [
        Path(args.cloud),
        Path(args.sections),
        Path(args.true_camera),
        Path(args.estimated_camera),
    ]
    if not args.draws:
        inputs.insert(0, Path(args.plan))
    RunConfig(
        inputs=tuple(inputs),
        scan=_scan_config(args),
        quadrant=args.quadrant,
        seed=args.seed,
    )
    cfg = _scan_config(args)
    true_pose = _read_camera(args.true_camera)
    estimated_pose = _read_camera(args.estimated_camera)
    grids = _build_grids(args.cloud, args.cloud_format, args.sections)
    cylinder = _parse_cylinder(args.cylinder) if args.cylinder else None
    if args.draws:
        study = error_propagation(
            true_pose,
            grids,
            cfg,
            args.quadrant,
            sigma_pos_m=args.sigma_pos,
            sigma_yaw_deg=args.sigma_yaw,
            n_draws=args.draws,
            seed=args.seed,
            cylinder=cylinder,
        )
        write_propagation_json(args.out, study)
        print(
            f"propagation: {len(study.draws)} draws, median error "
            f"{study.error_median_m:.4f} m -> {args.out}"
        )
        return EXIT_OK
    plan = read_plan_json(args.plan)
    report = execute_plan(
        plan, true_pose, estimated_pose, grids, cfg, args.quadrant, cylinder=cylinder
    )
    write_report_json(args.out, report)
    if args.csv:
        write_report_csv(args.csv, report)
    med = report.label_error_median_m
    med_text = f"{med:.6f}" if math.isfinite(med) else "n/a"
    print(
        f"simulated {report.image_count} images, median labelling error {med_text} m, "
        f"{report.missed_count} missed -> {args.out}"
    )
    return EXIT_OK


def cmd_randomize(args) -> int:
    RunConfig(inputs=(Path(args.boundary),), seed=args.seed)
    boundary = read_boundary_config(args.boundary)
    sizes = SplitSizes(train=args.train, val=args.val, test=args.test)
    manifest = generate_manifest(boundary, sizes=sizes, seed=args.seed, hfov_deg=args.hfov_deg)
    write_manifest_json(args.out, manifest)
    print(
        f"manifest: {sizes.total} samples (train {sizes.train} / val {sizes.val} / "
        f"test {sizes.test}), seed {args.seed} -> {args.out}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    RunConfig(inputs=(Path(args.predictions),))
    predictions, truths = load_external_predictions(args.predictions)
    if not predictions:
        raise CliError(EXIT_CONFIG, f"{args.predictions}: no samples to evaluate")
    stats = evaluate(predictions, truths)
    sys.stdout.write(format_stats(stats))
    if args.out:
        write_stats_report(args.out, stats)
    if args.csv:
        write_stats_csv(args.csv, stats)
    return EXIT_OK


def cmd_loss_check(args) -> int:
    RunConfig(inputs=(Path(args.predictions),))
    batch = load_batch_for_loss(args.predictions)
    cylinder = _parse_cylinder(args.cylinder) if args.cylinder else None
    default_weights = LossWeights(s_x=args.s_x, s_q=args.s_q, s_c=args.s_c)
    l_x, l_q, l_c = [], [], []
    skipped = 0
    totals = []
    for entry in batch:
        weights = entry.weights if entry.weights is not None else default_weights
        breakdown = combined_loss(
            entry.sample,
            weights,
            cylinder=cylinder,
            include_icsc=cylinder is not None,
        )
        l_x.append(breakdown.l_x)
        l_q.append(breakdown.l_q)
        if breakdown.l_c is not None:
            l_c.append(breakdown.l_c)
        elif cylinder is not None:
            skipped += 1
        totals.append(breakdown.total)

    def _channel_report(losses):
        mean = float(np.mean(losses))
        s_star = optimal_log_variance(mean)
        gradient = finite_difference_grad(
            lambda s: mean * math.exp(-float(s[0])) + float(s[0]), np.array([s_star])
        )
        return mean, s_star, float(gradient[0])

    mean_x, star_x, grad_x = _channel_report(l_x)
    mean_q, star_q, grad_q = _channel_report(l_q)
    report = {
        "n": len(batch),
        "mean_position_loss": mean_x,
        "mean_orientation_loss": mean_q,
        "mean_total": float(np.mean(totals)),
        "optimal_log_variance": {"s_x": star_x, "s_q": star_q},
        "gradient_at_optimum": {"s_x": grad_x, "s_q": grad_q},
    }
    if cylinder is not None:
        report["surface_skipped"] = skipped
        if l_c:
            mean_c, star_c, grad_c = _channel_report(l_c)
            report["mean_surface_loss"] = mean_c
            report["optimal_log_variance"]["s_c"] = star_c
            report["gradient_at_optimum"]["s_c"] = grad_c
    grads = report["gradient_at_optimum"].values()
    report["gradient_check_passed"] = all(abs(g) < 1e-5 for g in grads)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out:
        Path(args.out).write_text(text)
    if not report["gradient_check_passed"]:
        raise CliError(EXIT_COMPUTE, "finite-difference gradient check failed")
    return EXIT_OK


def load_batch_for_loss(path):
    batch = read_sample_batch(path)
    if not batch:
        raise CliError(EXIT_CONFIG, f"{path}: no samples in batch")
    return batch


def cmd_pipeline(args) -> int:
    RunConfig(
        inputs=(Path(args.cloud), Path(args.sections), Path(args.camera)),
        scan=_scan_config(args),
        quadrant=args.quadrant,
        seed=args.seed,
    )
    out = _out_dir(args.out)
    cfg = _scan_config(args)
    estimated_pose = _read_camera(args.camera)
    true_pose = _read_camera(args.true_camera) if args.true_camera else estimated_pose
    setup = _setup_for(estimated_pose, args.quadrant)
    grids = _build_grids(args.cloud, args.cloud_format, args.sections)
    triples = []
    for grid in grids:
        write_grid_csv(out / f"{grid.section.name}_grid.csv", grid)
        u = grid_to_pantilt(grid, setup)
        triples.append((u, grid, grid.section.kind))
    plan = plan_full(triples, cfg, args.quadrant)
    write_plan_json(out / "plan.json", plan)
    cylinder = _parse_cylinder(args.cylinder) if args.cylinder else None
    report = execute_plan(
        plan, true_pose, estimated_pose, grids, cfg, args.quadrant, cylinder=cylinder
    )
    write_report_json(out / "report.json", report)
    write_report_csv(out / "report.csv", report)
    med = report.label_error_median_m
    med_text = f"{med:.6f}" if math.isfinite(med) else "n/a"
    print(
        f"pipeline: {len(plan)} planned images, median labelling error {med_text} m, "
        f"coverage {min((s.coverage for s in report.sections), default=0.0):.4f} -> {out}"
    )
    return EXIT_OK


def _add_scan_flags(parser):
    parser.add_argument("--hfov-deg", type=float, default=6.15, help="horizontal FOV at scan zoom")
    parser.add_argument("--vfov-deg", type=float, default=3.46, help="vertical FOV at scan zoom")
    parser.add_argument("--mu", type=float, default=0.15, help="overlap ratio in [0, 1)")


def _add_cloud_flags(parser):
    parser.add_argument("--cloud", required=True, help="point-cloud file")
    parser.add_argument(
        "--cloud-format",
        choices=("xyz-ascii", "ply-ascii-subset"),
        default="xyz-ascii",
        help="point-cloud file format",
    )
    parser.add_argument("--sections", required=True, help="section config JSON")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptzscan",
        description="Plan, simulate, and evaluate PTZ-camera surface scans.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("interpolate", help="interpolate cloud sections onto 5 cm grids")
    _add_cloud_flags(p)
    p.add_argument("--out", required=True, help="output directory for grid CSVs")
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser("plan", help="generate an overlap-aware scan plan")
    _add_cloud_flags(p)
    _add_scan_flags(p)
    p.add_argument("--camera", required=True, help="estimated camera pose JSON")
    p.add_argument("--quadrant", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--out", required=True, help="plan JSON output")
    p.add_argument("--csv", help="optional plan CSV output")
    p.add_argument("--export-pantilt", help="optional directory for pan-tilt CSVs")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="execute a plan against ground truth")
    _add_cloud_flags(p)
    _add_scan_flags(p)
    p.add_argument("--plan", help="plan JSON (required unless --draws is given)")
    p.add_argument("--true-camera", required=True, help="true camera pose JSON")
    p.add_argument("--estimated-camera", required=True, help="estimated camera pose JSON")
    p.add_argument("--quadrant", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--cylinder", help="analytic cast target as 'radius,axis-height'")
    p.add_argument("--draws", type=int, default=0, help="Monte-Carlo draws (0 = single run)")
    p.add_argument("--sigma-pos", type=float, default=0.24, help="position noise sigma, m")
    p.add_argument("--sigma-yaw", type=float, default=2.0, help="yaw noise sigma, deg")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="report JSON output")
    p.add_argument("--csv", help="optional per-image CSV output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("randomize", help="generate a domain-randomised dataset manifest")
    p.add_argument("--boundary", required=True, help="per-quadrant boundary config JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train", type=int, default=4000)
    p.add_argument("--val", type=int, default=700)
    p.add_argument("--test", type=int, default=300)
    p.add_argument("--hfov-deg", type=float, default=72.5, help="recorded render FOV")
    p.add_argument("--out", required=True, help="manifest JSON output")
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("evaluate", help="median/RMSE pose-error statistics")
    p.add_argument("--predictions", required=True, help="batch JSONL of true/predicted poses")
    p.add_argument("--out", help="optional key=value report file")
    p.add_argument("--csv", help="optional stats CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("loss-check", help="loss report plus gradient check")
    p.add_argument("--predictions", required=True, help="batch JSONL of true/predicted poses")
    p.add_argument("--s-x", type=float, default=0.0, help="position log-variance weight")
    p.add_argument("--s-q", type=float, default=0.0, help="orientation log-variance weight")
    p.add_argument("--s-c", type=float, default=0.0, help="surface log-variance weight")
    p.add_argument("--cylinder", help="enable surface term: 'radius,axis-height'")
    p.add_argument("--out", help="optional JSON report file")
    p.set_defaults(func=cmd_loss_check)

    p = sub.add_parser("pipeline", help="interpolate, plan, and simulate in one run")
    _add_cloud_flags(p)
    _add_scan_flags(p)
    p.add_argument("--camera", required=True, help="estimated camera pose JSON")
    p.add_argument("--true-camera", help="true pose JSON (defaults to --camera)")
    p.add_argument("--quadrant", type=int, choices=(1, 2, 3, 4), required=True)
    p.add_argument("--cylinder", help="analytic cast target as 'radius,axis-height'")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_pipeline)

    return parser


def _configure_logging():
    level = os.environ.get("PTZSCAN_LOG_LEVEL", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))


def main(argv: Optional[Sequence[str]] = None) -> int:
    _configure_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        _report(exc.exit_code, str(exc))
        return exc.exit_code
    except (FormatError, PointCloudParseError) as exc:
        _report(EXIT_PARSE, str(exc))
        return EXIT_PARSE
    except FileNotFoundError as exc:
        _report(EXIT_IO, str(exc))
        return EXIT_IO
    except (
        DegenerateSectionError,
        CylinderIntersectionError,
        SurfaceMissError,
        InvalidSetupError,
    ) as exc:
        _report(EXIT_COMPUTE, str(exc))
        return EXIT_COMPUTE
    except OSError as exc:
        _report(EXIT_IO, str(exc))
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        _report(EXIT_CONFIG, str(exc))
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - safety net
        log.exception("unexpected failure")
        _report(EXIT_INTERNAL, f"{type(exc).__name__}: {exc}")
        return EXIT_INTERNAL


def _report(exit_code: int, message: str) -> None:
    category = _CATEGORIES.get(exit_code, "internal-error")
    print(f"error: category={category}: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
