"""Scene-frame geometry: quaternions, camera poses, and the fuselage cylinder.

Conventions (normative, see docs/conventions.md): right-handed scene frame
with z up and the fuselage axis along y at height ``axis_height``;
quaternions scalar-first (w, x, y, z); angles in degrees at every public
interface; ``FORWARD = (1, 0, 0)`` is the optical axis of a camera with
identity orientation.

All operations are pure functions on immutable values and are safe to call
concurrently.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "FORWARD",
    "T_MIN",
    "CameraPose",
    "CylinderModel",
    "Ray",
    "CylinderIntersectionError",
    "NoIntersectionError",
    "BehindCameraError",
    "AxisParallelRayError",
    "GimbalLockWarning",
    "vec3",
    "unit_quaternion",
    "quat_multiply",
    "quat_conjugate",
    "quat_from_axis_angle",
    "quat_from_yaw_pitch",
    "quat_to_matrix",
    "rotate_vector",
    "view_ray",
    "intersect_cylinder",
    "yaw_from_quaternion",
    "angular_distance",
    "wrap_degrees",
]

# Optical axis of a camera with identity orientation: horizontal,
# perpendicular to the fuselage, pointing from the near-side camera
# region toward the vehicle.
FORWARD = np.array([1.0, 0.0, 0.0])

# Intersections with ray parameter below this are treated as behind the
# camera (numerical guard against self-intersection at the origin).
T_MIN = 1e-6

_UNIT_TOL = 1e-9


class CylinderIntersectionError(Exception):
    """A view ray has no usable intersection with the cylinder."""


class NoIntersectionError(CylinderIntersectionError):
    """The ray misses the cylinder entirely (negative discriminant)."""


class BehindCameraError(CylinderIntersectionError):
    """Both intersections lie behind the ray origin."""


class AxisParallelRayError(CylinderIntersectionError):
    """The ray is parallel to the cylinder axis; no unique nearest point."""


class GimbalLockWarning(UserWarning):
    """Yaw extraction hit the pitch = +/-90 degree degeneracy."""


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """Build a finite 3-vector (metres, scene frame)."""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    return v


def unit_quaternion(w: float, x: float, y: float, z: float) -> np.ndarray:
    """Build a normalized scalar-first quaternion from components."""
    q = np.array([w, x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(q)):
        raise ValueError(f"quaternion components must be finite, got {q}")
    n = np.linalg.norm(q)
    if n == 0.0:
        raise ValueError("cannot normalize a zero quaternion")
    return q / n


def _as_unit_quaternion(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (4,):
        raise ValueError(f"quaternion must have shape (4,), got {q.shape}")
    n = np.linalg.norm(q)
    if not math.isfinite(n) or abs(n - 1.0) > _UNIT_TOL:
        raise ValueError(f"quaternion is not normalized (norm {n})")
    return q


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product of two scalar-first quaternions."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_from_axis_angle(axis: np.ndarray, angle_deg: float) -> np.ndarray:
    """Unit quaternion rotating by ``angle_deg`` about ``axis``."""
    axis = np.asarray(axis, dtype=np.float64)
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("rotation axis must be nonzero")
    half = math.radians(angle_deg) / 2.0
    s = math.sin(half) / n
    return np.array([math.cos(half), axis[0] * s, axis[1] * s, axis[2] * s])


def quat_from_yaw_pitch(yaw_deg: float, pitch_deg: float = 0.0) -> np.ndarray:
    """Orientation from intrinsic z-y' angles (roll zero).

    Yaw rotates about scene z; pitch about the rotated y axis. A camera
    tilted down by ``t`` degrees has pitch ``+t`` (tilt = -pitch).
    """
    qz = quat_from_axis_angle(np.array([0.0, 0.0, 1.0]), yaw_deg)
    qy = quat_from_axis_angle(np.array([0.0, 1.0, 0.0]), pitch_deg)
    return quat_multiply(qz, qy)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix of a unit scalar-first quaternion."""
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


@dataclass(frozen=True, eq=False)
class CameraPose:
    """Position (m) plus unit-quaternion orientation in the scene frame."""

    position: np.ndarray
    orientation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", vec3(*np.asarray(self.position, dtype=np.float64)))
        object.__setattr__(self, "orientation", _as_unit_quaternion(self.orientation))


@dataclass(frozen=True)
class CylinderModel:
    """Fuselage surrogate: axis along y at height ``axis_height``, radius ``radius``.

    Surface points c satisfy ``c_x**2 + (c_z - axis_height)**2 == radius**2``.
    """

    axis_height: float
    radius: float

    def __post_init__(self):
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not math.isfinite(self.axis_height):
            raise ValueError(f"axis_height must be finite, got {self.axis_height}")

    def surface_residual(self, point: np.ndarray) -> float:
        """Signed residual of the surface equation at ``point`` (m^2)."""
        return float(point[0] ** 2 + (point[2] - self.axis_height) ** 2 - self.radius**2)


@dataclass(frozen=True, eq=False)
class Ray:
    """Half-line ``origin + t * direction`` with unit direction."""

    origin: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "origin", vec3(*np.asarray(self.origin, dtype=np.float64)))
        d = np.asarray(self.direction, dtype=np.float64)
        n = np.linalg.norm(d)
        if not math.isfinite(n) or abs(n - 1.0) > _UNIT_TOL:
            raise ValueError(f"ray direction must be unit length (norm {n})")
        object.__setattr__(self, "direction", d)

    def at(self, t: float) -> np.ndarray:
        return self.origin + t * self.direction


def rotate_vector(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector ``v`` by unit quaternion ``q``; preserves the norm."""
    q = _as_unit_quaternion(q)
    v = np.asarray(v, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector components must be finite, got {v}")
    # q v q* expanded via the twice-cross-product identity.
    u = q[1:]
    w = q[0]
    c = np.cross(u, v)
    return v + 2.0 * (w * c + np.cross(u, c))


def view_ray(pose: CameraPose) -> Ray:
    """Optical-axis ray of a camera pose: origin at the position, direction
    FORWARD rotated by the orientation."""
    return Ray(pose.position, rotate_vector(pose.orientation, FORWARD))


def intersect_cylinder(ray: Ray, cylinder: CylinderModel) -> np.ndarray:
    """Nearest forward intersection of ``ray`` with the cylinder surface.

    Solves the quadratic obtained by substituting the ray into the surface
    equation and returns the point at the smallest root ``t > T_MIN``.

    Raises:
        AxisParallelRayError: direction has no x or z component.
        NoIntersectionError: the ray misses the surface.
        BehindCameraError: both roots are at or behind the origin.
    """
    ox, oz = ray.origin[0], ray.origin[2] - cylinder.axis_height
    vx, vz = ray.direction[0], ray.direction[2]
    a = vx * vx + vz * vz
    b = 2.0 * (ox * vx + oz * vz)
    c = ox * ox + oz * oz - cylinder.radius**2

    if a == 0.0:
        raise AxisParallelRayError(
            "ray is parallel to the cylinder axis; intersection is empty or degenerate"
        )
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        raise NoIntersectionError(f"ray misses the cylinder (discriminant {disc:.3e})")

    # Numerically stable pair of roots.
    sq = math.sqrt(disc)
    if b >= 0.0:
        qv = -0.5 * (b + sq)
    else:
        qv = -0.5 * (b - sq)
    roots = sorted((qv / a, c / qv)) if qv != 0.0 else sorted((0.0, -b / a))

    for t in roots:
        if t > T_MIN:
            return ray.at(t)
    raise BehindCameraError(f"both intersections behind the camera (t = {roots})")


def yaw_from_quaternion(q: np.ndarray) -> float:
    """Rotation about scene z under the intrinsic z-y'-x'' convention, degrees.

    Range (-180, 180]. At pitch +/-90 degrees the yaw/roll split is
    degenerate; yaw is then reported with roll fixed to zero and a
    GimbalLockWarning is issued.
    """
    q = _as_unit_quaternion(q)
    r = quat_to_matrix(q)
    sin_pitch = -r[2, 0]
    if abs(sin_pitch) >= 1.0 - 1e-12:
        warnings.warn(
            "pitch at +/-90 degrees; yaw reported with roll fixed to zero",
            GimbalLockWarning,
            stacklevel=2,
        )
        return math.degrees(math.atan2(-r[0, 1], r[1, 1]))
    return math.degrees(math.atan2(r[1, 0], r[0, 0]))


def angular_distance(q1: np.ndarray, q2: np.ndarray) -> float:
    """Rotation angle between two unit quaternions, degrees in [0, 180].

    Symmetric and invariant under a sign flip of either argument. Computed
    from the relative rotation with atan2, which stays accurate for tiny
    angles where an arccos-of-dot formulation loses precision.
    """
    q1 = _as_unit_quaternion(q1)
    q2 = _as_unit_quaternion(q2)
    r = quat_multiply(quat_conjugate(q1), q2)
    return math.degrees(2.0 * math.atan2(float(np.linalg.norm(r[1:])), abs(float(r[0]))))


def wrap_degrees(angle: float) -> float:
    """Wrap an angle into (-180, 180] degrees.

    In-range inputs are returned unchanged (no round-trip through the
    modulo, which would otherwise perturb small angles by an ulp or two).
    """
    if -180.0 < angle <= 180.0:
        return float(angle)
    return 180.0 - ((180.0 - angle) % 360.0)
