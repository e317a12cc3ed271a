"""Seam lines, corner vertex, weldable extents and torch poses.

The fillet corner is the intersection of the three fitted plates; each seam is
a plane-pair intersection line anchored at that corner, with its weldable
extent measured from the plate inliers near the line. Torch orientation
follows standard fillet practice: the approach axis bisects the open wedge
between the plates (45 deg work angle for orthogonal plates), tilted by a
drag/push travel angle about the lateral axis.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateCorner, EmptySeam, ParallelPlanes,
                     UndefinedBisector)
from .geom3d import axis_angle, unit

DEFAULT_BAND_MM = 5.0        # distance from the seam line that counts as "near"
DEFAULT_GAP_TOL_MM = 15.0    # larger parameter gaps split the extent cluster
DEFAULT_TRAVEL_ANGLE_DEG = 10.0

HORIZONTAL_Z_LIMIT = 0.5     # |dir . z| below this => horizontal seam


@dataclass(frozen=True)
class Line3:
    origin: np.ndarray
    direction: np.ndarray  # unit

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        d = np.asarray(self.direction, dtype=float).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("direction must be unit length")
        object.__setattr__(self, "direction", d)

    def point_at(self, t):
        return self.origin + t * self.direction


@dataclass(frozen=True)
class SeamSegment:
    """A weldable fillet seam: corner anchor, direction into the material,
    measured maximum length, and the indices of its two adjacent planes."""

    corner: np.ndarray
    direction: np.ndarray
    length_max: float
    plane_pair: tuple
    orientation_class: str  # "horizontal" | "vertical"

    def __post_init__(self):
        object.__setattr__(self, "corner", np.asarray(self.corner, dtype=float).reshape(3))
        d = np.asarray(self.direction, dtype=float).reshape(3)
        if abs(np.linalg.norm(d) - 1.0) > 1e-9:
            raise ValueError("direction must be unit length")
        object.__setattr__(self, "direction", d)
        if self.length_max <= 0.0:
            raise ValueError("length_max must be positive")
        expected = "horizontal" if abs(d[2]) < HORIZONTAL_Z_LIMIT else "vertical"
        if self.orientation_class != expected:
            raise ValueError(
                f"orientation_class {self.orientation_class!r} does not match "
                f"|direction.z| = {abs(d[2]):.3f}")


@dataclass(frozen=True)
class TorchPose:
    """Torch frame at a seam point; rotation columns are
    [travel axis, lateral axis, approach axis]."""

    position: np.ndarray
    rotation: np.ndarray
    work_angle: float    # deg from each plate to the approach axis
    travel_angle: float  # deg drag/push tilt about the lateral axis

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        rot = np.asarray(self.rotation, dtype=float)
        if not np.allclose(rot.T @ rot, np.eye(3), atol=1e-9):
            raise ValueError("rotation must be orthonormal")
        if abs(np.linalg.det(rot) - 1.0) > 1e-9:
            raise ValueError("rotation must be right-handed")
        object.__setattr__(self, "rotation", rot)

    @property
    def travel_axis(self):
        return self.rotation[:, 0]

    @property
    def lateral_axis(self):
        return self.rotation[:, 1]

    @property
    def approach_axis(self):
        return self.rotation[:, 2]


def intersect_two_planes(a, b):
    """Intersection line of two planes; origin is the minimum-norm point."""
    cross = np.cross(a.normal, b.normal)
    norm = np.linalg.norm(cross)
    if norm <= 1e-6:
        raise ParallelPlanes("planes are parallel within tolerance")
    direction = cross / norm
    system = np.vstack([a.normal, b.normal])
    rhs = np.array([a.d, b.d])
    origin, *_ = np.linalg.lstsq(system, rhs, rcond=None)  # minimum-norm solution
    return Line3(origin, direction)


def intersect_three_planes(a, b, c):
    """Common vertex of three planes (the fillet corner)."""
    normals = np.vstack([a.normal, b.normal, c.normal])
    if abs(np.linalg.det(normals)) <= 1e-9:
        raise DegenerateCorner("plane normals are linearly dependent")
    return np.linalg.solve(normals, np.array([a.d, b.d, c.d]))


def seam_extent(line, points_a, points_b, band=DEFAULT_BAND_MM,
                gap_tol=DEFAULT_GAP_TOL_MM):
    """Contiguous seam parameter range covered by plate points near the line.

    Points of both adjacent plates within `band` of the line are projected
    onto the line parameter t (t = 0 at the line origin, i.e. the corner).
    The covered range is the run of projected points, split at gaps larger
    than `gap_tol`, that lies closest to t = 0 (stray inliers far along the
    infinite plane must not stretch the seam). Returns (t_min, t_max).
    """
    pts = np.vstack([np.asarray(points_a, dtype=float).reshape(-1, 3),
                     np.asarray(points_b, dtype=float).reshape(-1, 3)])
    rel = pts - line.origin
    t = rel @ line.direction
    radial = rel - np.outer(t, line.direction)
    near = np.linalg.norm(radial, axis=1) <= band
    if not near.any():
        raise EmptySeam(f"no plate points within {band} mm of the seam line")
    ts = np.sort(t[near])

    splits = np.nonzero(np.diff(ts) > gap_tol)[0]
    starts = np.concatenate([[0], splits + 1])
    ends = np.concatenate([splits, [len(ts) - 1]])

    best = None
    for s, e in zip(starts, ends):
        lo, hi = ts[s], ts[e]
        dist = 0.0 if lo <= 0.0 <= hi else min(abs(lo), abs(hi))
        if best is None or dist < best[0]:
            best = (dist, lo, hi)
    return best[1], best[2]


def point_along_seam(corner, direction, distance):
    """corner + distance * direction (distance >= 0)."""
    if distance < 0.0:
        raise ValueError("distance must be >= 0")
    return np.asarray(corner, dtype=float) + distance * np.asarray(direction, dtype=float)


def outward_normal(plane, toward):
    """Plane normal flipped, if needed, to point toward the reference point.

    The reference is the cloud centroid: for an open fillet structure it lies
    on the torch side of every plate, so the returned normal points away from
    the material.
    """
    n = plane.normal
    if float(n @ np.asarray(toward, dtype=float)) - plane.d < 0.0:
        return -n
    return n.copy()


def torch_pose_at(point, seam, outward_normals, travel_sign=1,
                  travel_angle=DEFAULT_TRAVEL_ANGLE_DEG):
    """Torch pose at a point on a seam.

    `outward_normals` are the two adjacent plate normals oriented away from
    the material (see outward_normal). The approach axis is the negated
    bisector of the pair, i.e. it points into the fillet corner and makes the
    work angle (half the open dihedral) with each plate; the whole frame is
    then tilted by `travel_angle` degrees about the lateral axis, which keeps
    the frame orthonormal while the motion still runs along the seam.
    travel_sign -1 welds the seam in the reverse direction.
    """
    n1, n2 = (unit(n) for n in outward_normals)
    bisector_sum = n1 + n2
    if np.linalg.norm(bisector_sum) < 1e-9:
        raise UndefinedBisector("plate normals are antiparallel")
    approach = -unit(bisector_sum)
    travel = float(travel_sign) * seam.direction
    # seam direction lies in both planes, so approach is already ~orthogonal;
    # remove the residual fit noise exactly
    approach = unit(approach - (approach @ travel) * travel)
    lateral = np.cross(approach, travel)
    frame = np.column_stack([travel, lateral, approach])
    if travel_angle != 0.0:
        frame = axis_angle(lateral, travel_angle) @ frame

    open_dihedral = 180.0 - math.degrees(
        math.acos(float(np.clip(n1 @ n2, -1.0, 1.0))))
    return TorchPose(position=np.asarray(point, dtype=float),
                     rotation=frame,
                     work_angle=open_dihedral / 2.0,
                     travel_angle=float(travel_angle))


def extract_seams(planes, inlier_points, cloud_points, band=DEFAULT_BAND_MM,
                  gap_tol=DEFAULT_GAP_TOL_MM):
    """Corner plus the (horizontal, vertical) seam pair from three planes.

    `planes` and `inlier_points` come from planefind.extract_planes. All three
    pairwise intersection lines are measured; the candidate with the most
    vertical direction becomes the vertical seam and the longest remaining
    one the horizontal seam (the cell welds the long base fillet).
    Each seam direction is oriented so the covered material lies at t > 0.
    """
    corner = intersect_three_planes(*planes)

    candidates = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        try:
            line = intersect_two_planes(planes[i], planes[j])
        except ParallelPlanes:
            continue
        # re-anchor at the corner (it lies on the line up to fit residual)
        shift = (corner - line.origin) @ line.direction
        line = Line3(line.point_at(shift), line.direction)
        try:
            t_min, t_max = seam_extent(line, inlier_points[i], inlier_points[j],
                                       band=band, gap_tol=gap_tol)
        except EmptySeam:
            continue
        direction, lo, hi = line.direction, t_min, t_max
        if abs(t_max) < abs(t_min):  # material extends toward negative t: flip
            direction, lo, hi = -direction, -t_max, -t_min
        candidates.append(((i, j), direction, hi - lo))

    if len(candidates) < 2:
        raise EmptySeam("could not measure two seams from the fitted planes")

    by_verticality = sorted(candidates, key=lambda c: -abs(c[1][2]))
    v_pair, v_dir, v_len = by_verticality[0]
    horizontals = sorted(by_verticality[1:], key=lambda c: -c[2])
    h_pair, h_dir, h_len = horizontals[0]

    if abs(v_dir[2]) < HORIZONTAL_Z_LIMIT or abs(h_dir[2]) >= HORIZONTAL_Z_LIMIT:
        raise EmptySeam("scene does not present one horizontal and one vertical seam")
    horizontal = SeamSegment(corner=corner, direction=h_dir, length_max=h_len,
                             plane_pair=h_pair, orientation_class="horizontal")
    vertical = SeamSegment(corner=corner, direction=v_dir, length_max=v_len,
                           plane_pair=v_pair, orientation_class="vertical")
    return corner, [horizontal, vertical]
