"""Point-cloud ingestion, sectioning, and 5 cm surface-lattice interpolation.

A vehicle model arrives as a scattered point cloud. It is cut into named
sections (fuselage, tail, wing, stabiliser) by axis-aligned boxes, and each
section is resampled onto a regular 0.05 m lattice by piecewise-linear
interpolation over a Delaunay triangulation of the projected points:
height z over the (x, y) plane for most sections, lateral x over (y, z) for
the near-vertical tail.

Grid rows share one row coordinate (x, or z for the tail) and columns share
one y value; lattice points outside the convex hull of the section's data
are marked invalid. Input points are sorted and de-duplicated before
triangulation so repeated runs are bit-identical regardless of file order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.interpolate import LinearNDInterpolator
from scipy.spatial import QhullError

__all__ = [
    "GRID_RESOLUTION",
    "KIND_FUSELAGE",
    "KIND_TAIL",
    "KIND_WING",
    "KIND_STABILISER",
    "INTERP_Z_OVER_XY",
    "INTERP_X_OVER_YZ",
    "RELEVANCE_BACK",
    "RELEVANCE_FRONT",
    "PointCloudParseError",
    "EmptySectionWarning",
    "DegenerateSectionError",
    "PointCloud",
    "SectionSpec",
    "SurfaceGrid",
    "load_point_cloud",
    "write_point_cloud",
    "section_points",
    "interpolate_section",
    "grid_cell",
]

# Lattice spacing for interpolated surface grids, metres.
GRID_RESOLUTION = 0.05

KIND_FUSELAGE = "fuselage"
KIND_TAIL = "tail"
KIND_WING = "wing"
KIND_STABILISER = "stabiliser"
_KINDS = (KIND_FUSELAGE, KIND_TAIL, KIND_WING, KIND_STABILISER)

INTERP_Z_OVER_XY = "z-over-xy"
INTERP_X_OVER_YZ = "x-over-yz"

RELEVANCE_BACK = "back-half"
RELEVANCE_FRONT = "front-half"


class PointCloudParseError(Exception):
    """A cloud file could not be parsed; message includes file and line."""


class EmptySectionWarning(UserWarning):
    """A section box selected no points; the section is unusable."""


class DegenerateSectionError(Exception):
    """Section points are too few or collinear after projection."""


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Scattered 3D points (N x 3, metres) with optional per-point tags."""

    points: np.ndarray
    tags: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (N, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", pts)
        if self.tags is not None and len(self.tags) != len(pts):
            raise ValueError(
                f"tag count {len(self.tags)} does not match point count {len(pts)}"
            )

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class SectionSpec:
    """A named axis-aligned box cut of the cloud plus interpolation layout.

    ``interpolated_coordinate`` is fixed by ``kind``: the tail interpolates
    x over (y, z), everything else z over (x, y). ``relevance`` records
    which half of the vehicle a camera must occupy for this section to be
    worth scanning.
    """

    name: str
    kind: str
    box_min: tuple[float, float, float]
    box_max: tuple[float, float, float]
    relevance: str = RELEVANCE_BACK
    interpolated_coordinate: str = field(default="")

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown section kind {self.kind!r}")
        if self.relevance not in (RELEVANCE_BACK, RELEVANCE_FRONT):
            raise ValueError(f"unknown relevance {self.relevance!r}")
        lo = tuple(float(v) for v in self.box_min)
        hi = tuple(float(v) for v in self.box_max)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("box bounds must be 3-tuples")
        for axis, (a, b) in enumerate(zip(lo, hi)):
            if not (math.isfinite(a) and math.isfinite(b) and a < b):
                raise ValueError(f"box must satisfy min < max on axis {axis}: {a} vs {b}")
        object.__setattr__(self, "box_min", lo)
        object.__setattr__(self, "box_max", hi)
        expected = INTERP_X_OVER_YZ if self.kind == KIND_TAIL else INTERP_Z_OVER_XY
        if self.interpolated_coordinate == "":
            object.__setattr__(self, "interpolated_coordinate", expected)
        elif self.interpolated_coordinate != expected:
            raise ValueError(
                f"section kind {self.kind!r} requires interpolated coordinate "
                f"{expected!r}, got {self.interpolated_coordinate!r}"
            )


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Regular 0.05 m lattice of interpolated surface points for a section.

    ``points[i, j]`` is the 3D surface point at row i, column j; ``valid``
    marks cells inside the data's convex hull. Rows all share one row
    coordinate (x, or z for the tail); columns all share one y.
    """

    section: SectionSpec
    row_values: np.ndarray
    col_values: np.ndarray
    points: np.ndarray
    valid: np.ndarray
    resolution: float = GRID_RESOLUTION

    @property
    def shape(self) -> tuple[int, int]:
        return self.valid.shape

    def cell(self, i: int, j: int) -> Optional[np.ndarray]:
        """Surface point at (i, j), or None when outside the data hull."""
        if not (0 <= i < self.shape[0] and 0 <= j < self.shape[1]):
            raise IndexError(f"cell ({i}, {j}) outside grid of shape {self.shape}")
        if not self.valid[i, j]:
            return None
        return self.points[i, j].copy()


def load_point_cloud(path: str | Path, fmt: str = "xyz-ascii") -> PointCloud:
    """Read a cloud from ``xyz-ascii`` (one `x y z` per line, `#` comments)
    or ``ply-ascii-subset`` (ASCII ply header + vertex positions)."""
    path = Path(path)
    if fmt == "xyz-ascii":
        return _load_xyz(path)
    if fmt == "ply-ascii-subset":
        return _load_ply(path)
    raise ValueError(f"unknown point-cloud format {fmt!r}")


def _load_xyz(path: Path) -> PointCloud:
    points = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise PointCloudParseError(
                    f"{path}:{lineno}: expected 3 values, got {len(parts)}"
                )
            try:
                points.append([float(v) for v in parts])
            except ValueError as exc:
                raise PointCloudParseError(f"{path}:{lineno}: {exc}") from exc
    if not points:
        raise PointCloudParseError(f"{path}: no points found")
    return PointCloud(np.array(points, dtype=np.float64))


def _load_ply(path: Path) -> PointCloud:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "ply":
        raise PointCloudParseError(f"{path}:1: missing 'ply' magic line")
    vertex_count = None
    body_start = None
    for idx, line in enumerate(lines[1:], start=2):
        text = line.strip()
        if text.startswith("element vertex"):
            try:
                vertex_count = int(text.split()[2])
            except (IndexError, ValueError) as exc:
                raise PointCloudParseError(f"{path}:{idx}: bad element line") from exc
        elif text.startswith("element "):
            raise PointCloudParseError(
                f"{path}:{idx}: only vertex elements are supported"
            )
        elif text == "end_header":
            body_start = idx
            break
    if vertex_count is None or body_start is None:
        raise PointCloudParseError(f"{path}: header lacks vertex count or end_header")
    body = [ln for ln in lines[body_start:] if ln.strip()]
    if len(body) != vertex_count:
        raise PointCloudParseError(
            f"{path}: header declares {vertex_count} vertices, body has {len(body)}"
        )
    if vertex_count == 0:
        raise PointCloudParseError(f"{path}: empty vertex list")
    points = np.empty((vertex_count, 3), dtype=np.float64)
    for row, line in enumerate(body):
        parts = line.split()
        if len(parts) < 3:
            raise PointCloudParseError(
                f"{path}:{body_start + 1 + row}: vertex line has fewer than 3 values"
            )
        try:
            points[row] = [float(v) for v in parts[:3]]
        except ValueError as exc:
            raise PointCloudParseError(
                f"{path}:{body_start + 1 + row}: {exc}"
            ) from exc
    return PointCloud(points)


def write_point_cloud(path: str | Path, cloud: PointCloud, fmt: str = "xyz-ascii") -> None:
    """Write a cloud in a form ``load_point_cloud`` reads back exactly."""
    path = Path(path)
    if fmt == "xyz-ascii":
        with open(path, "w", encoding="utf-8") as fh:
            for x, y, z in cloud.points:
                fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        return
    if fmt == "ply-ascii-subset":
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("ply\nformat ascii 1.0\n")
            fh.write(f"element vertex {len(cloud)}\n")
            fh.write("property double x\nproperty double y\nproperty double z\n")
            fh.write("end_header\n")
            for x, y, z in cloud.points:
                fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")
        return
    raise ValueError(f"unknown point-cloud format {fmt!r}")


def section_points(cloud: PointCloud, spec: SectionSpec) -> PointCloud:
    """Points of ``cloud`` inside the section's closed box (bounds included).

    An empty selection returns an empty cloud and raises
    EmptySectionWarning; downstream interpolation will refuse it.
    """
    lo = np.array(spec.box_min)
    hi = np.array(spec.box_max)
    mask = np.all((cloud.points >= lo) & (cloud.points <= hi), axis=1)
    selected = cloud.points[mask]
    if selected.shape[0] == 0:
        warnings.warn(
            f"section {spec.name!r} selected no points", EmptySectionWarning, stacklevel=2
        )
    tags = None
    if cloud.tags is not None:
        tags = tuple(t for t, m in zip(cloud.tags, mask) if m)
    return PointCloud(selected, tags)


def _lattice(lo: float, hi: float, resolution: float) -> np.ndarray:
    """Ascending lattice from lo to hi inclusive at the given spacing.

    The final point is clipped back to hi when accumulated rounding pushes
    it a few ulps past the data range (which would fall outside the hull).
    """
    n = int(math.floor((hi - lo) / resolution + 1e-9)) + 1
    values = lo + resolution * np.arange(n)
    if n > 1 and values[-1] > hi:
        values[-1] = hi
    return values


def interpolate_section(sub: PointCloud, spec: SectionSpec) -> SurfaceGrid:
    """Interpolate a section onto its 0.05 m lattice.

    Piecewise-linear over a Delaunay triangulation of the projected points;
    the lattice spans the projected bounding rectangle anchored at its min
    corner. Cells outside the convex hull are invalid. Raises
    DegenerateSectionError for < 3 usable points or a collinear projection.
    """
    if len(sub) == 0:
        raise DegenerateSectionError(f"section {spec.name!r} has no points")
    # Canonical ordering, then first-wins de-duplication of projected
    # coordinates, so triangulation ties never depend on input order.
    pts = sub.points[np.lexsort((sub.points[:, 2], sub.points[:, 1], sub.points[:, 0]))]
    if spec.interpolated_coordinate == INTERP_Z_OVER_XY:
        proj = pts[:, :2]
        values = pts[:, 2]
    else:
        proj = pts[:, 1:]
        values = pts[:, 0]
    _, keep = np.unique(proj, axis=0, return_index=True)
    keep.sort()
    proj = proj[keep]
    values = values[keep]

    if len(proj) < 3 or np.linalg.matrix_rank(proj[1:] - proj[0], tol=1e-12) < 2:
        raise DegenerateSectionError(
            f"section {spec.name!r}: need >= 3 non-collinear projected points"
        )
    try:
        interp = LinearNDInterpolator(proj, values)
    except QhullError as exc:
        raise DegenerateSectionError(
            f"section {spec.name!r}: triangulation failed ({exc})"
        ) from exc

    if spec.interpolated_coordinate == INTERP_Z_OVER_XY:
        row_axis, col_axis = 0, 1  # rows over x, columns over y
    else:
        row_axis, col_axis = 1, 0  # rows over z, columns over y
    row_values = _lattice(proj[:, row_axis].min(), proj[:, row_axis].max(), GRID_RESOLUTION)
    col_values = _lattice(proj[:, col_axis].min(), proj[:, col_axis].max(), GRID_RESOLUTION)

    rr, cc = np.meshgrid(row_values, col_values, indexing="ij")
    if spec.interpolated_coordinate == INTERP_Z_OVER_XY:
        queries = np.column_stack([rr.ravel(), cc.ravel()])
    else:
        queries = np.column_stack([cc.ravel(), rr.ravel()])
    interpolated = interp(queries).reshape(rr.shape)
    valid = np.isfinite(interpolated)

    points = np.empty(rr.shape + (3,), dtype=np.float64)
    if spec.interpolated_coordinate == INTERP_Z_OVER_XY:
        points[..., 0] = rr
        points[..., 1] = cc
        points[..., 2] = interpolated
    else:
        points[..., 0] = interpolated
        points[..., 1] = cc
        points[..., 2] = rr
    points[~valid] = np.nan
    return SurfaceGrid(
        section=spec,
        row_values=row_values,
        col_values=col_values,
        points=points,
        valid=valid,
    )


def grid_cell(grid: SurfaceGrid, i: int, j: int) -> Optional[np.ndarray]:
    """Surface point stored at (i, j), or None for an out-of-hull cell."""
    return grid.cell(i, j)
