"""Tool-center-point calibration from flange poses.

Position part: touch one fixed point in space with the torch tip under at
least three distinct flange orientations. Each sample gives
R_i @ t + p_i = c with unknown tool offset t (flange frame) and pivot point c
(world frame); the stacked 3N x 6 system is solved by least squares.
Orientation part: three jogged points (orient origin, X direction,
Z direction) define the tool axes by Gram-Schmidt.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateOrientation, UnderdeterminedCalibration
from .geom3d import is_rotation, unit

MIN_SINGULAR_VALUE = 1e-6


@dataclass(frozen=True)
class FlangePose:
    """Robot flange pose in world frame (mm / orthonormal rotation)."""

    position: np.ndarray
    rotation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position",
                           np.asarray(self.position, dtype=float).reshape(3))
        rot = np.asarray(self.rotation, dtype=float)
        if not is_rotation(rot, tol=1e-6):
            raise ValueError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", rot)


@dataclass(frozen=True)
class ToolFrame:
    """TCP offset and tool orientation expressed in the flange frame."""

    offset: np.ndarray
    rotation: np.ndarray
    residual: float  # RMS touch residual, mm

    def __post_init__(self):
        object.__setattr__(self, "offset",
                           np.asarray(self.offset, dtype=float).reshape(3))
        rot = np.asarray(self.rotation, dtype=float)
        if not is_rotation(rot, tol=1e-6):
            raise ValueError("rotation must be orthonormal with det +1")
        object.__setattr__(self, "rotation", rot)
        if self.residual < 0.0:
            raise ValueError("residual must be >= 0")


def solve_tcp_offset(samples):
    """Recover (offset, reference_point, residual) from touch poses.

    residual is the RMS of ||R_i @ offset + p_i - reference_point|| over the
    samples. Raises UnderdeterminedCalibration when the flange rotations are
    too similar to separate offset from reference point.
    """
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples, got {len(samples)}")
    n = len(samples)
    system = np.zeros((3 * n, 6))
    rhs = np.zeros(3 * n)
    for i, pose in enumerate(samples):
        system[3 * i:3 * i + 3, 0:3] = pose.rotation
        system[3 * i:3 * i + 3, 3:6] = -np.eye(3)
        rhs[3 * i:3 * i + 3] = -pose.position

    smallest = np.linalg.svd(system, compute_uv=False)[-1]
    if smallest <= MIN_SINGULAR_VALUE:
        raise UnderdeterminedCalibration(
            f"stacked system is rank deficient (s_min = {smallest:.2e}); "
            "use more distinct flange orientations")

    solution, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    offset, reference = solution[:3], solution[3:]
    errs = system @ solution - rhs
    residual = float(np.sqrt(np.mean(np.sum(errs.reshape(n, 3) ** 2, axis=1))))
    return offset, reference, residual


def solve_tool_orientation(orient_origin, x_point, z_point):
    """Tool rotation from the orient-origin / X-direction / Z-direction points.

    x axis points from origin toward x_point; z is the z_point direction
    orthogonalized against x; y completes the right-handed frame.
    """
    origin = np.asarray(orient_origin, dtype=float).reshape(3)
    dx = np.asarray(x_point, dtype=float).reshape(3) - origin
    dz = np.asarray(z_point, dtype=float).reshape(3) - origin
    if np.linalg.norm(dx) < 1e-9 or np.linalg.norm(dz) < 1e-9:
        raise DegenerateOrientation("orientation points coincide with the origin")
    x_axis = unit(dx)
    dz_perp = dz - (dz @ x_axis) * x_axis
    if np.linalg.norm(dz_perp) < 1e-9 * np.linalg.norm(dz):
        raise DegenerateOrientation("orientation points are collinear")
    z_axis = unit(dz_perp)
    y_axis = np.cross(z_axis, x_axis)
    return np.column_stack([x_axis, y_axis, z_axis])


def solve_tool_frame(samples, orient_origin=None, x_point=None, z_point=None):
    """Full six-point result: offset from the touch poses plus, when the three
    direction points are given, the tool orientation (identity otherwise)."""
    offset, _, residual = solve_tcp_offset(samples)
    if orient_origin is not None:
        rotation = solve_tool_orientation(orient_origin, x_point, z_point)
    else:
        rotation = np.eye(3)
    return ToolFrame(offset=offset, rotation=rotation, residual=residual)


def load_poses_csv(path):
    """Flange poses from CSV rows: x,y,z plus row-major rotation (12 columns)."""
    poses = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#") or line.lower().startswith("x,"):
                continue
            fields = [float(v) for v in line.split(",")]
            if len(fields) != 12:
                raise ValueError(f"line {lineno}: expected 12 columns, got {len(fields)}")
            poses.append(FlangePose(position=fields[:3],
                                    rotation=np.reshape(fields[3:], (3, 3))))
    return poses
