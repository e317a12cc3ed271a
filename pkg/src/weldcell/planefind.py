"""Dominant-plane detection: least-squares plane fits and sequential RANSAC.

Planes are stored in Hessian form n . p = d with a canonical sign so that two
fits of the same surface compare directly: the first normal component larger
in magnitude than SIGN_EPS must be positive. SIGN_EPS is deliberately coarse
(1e-3) because a fitted normal carries ~1e-5 noise in its true-zero
components; a literal "first nonzero" rule would flip signs seed to seed.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFit, NoPlaneFound, NoThreePlanes

SIGN_EPS = 1e-3
UNIT_TOL = 1e-9
# normals closer than this are considered the same plate orientation
MIN_PAIR_ANGLE_DEG = 10.0


@dataclass(frozen=True, eq=False)
class Plane:
    """Plane n . p = d with unit, canonically signed normal (mm)."""

    normal: np.ndarray
    d: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"normal must be unit length, got |n| = {norm!r}")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "d", float(self.d))

    def distances(self, points):
        """Unsigned point-plane distances for an (N, 3) array."""
        return np.abs(np.asarray(points, dtype=float) @ self.normal - self.d)

    def __repr__(self):
        n = self.normal
        return f"Plane(({n[0]:+.6f}, {n[1]:+.6f}, {n[2]:+.6f}) . p = {self.d:.6f})"


def canonical_plane(normal, d):
    """Normalize and sign-canonicalize a plane equation into a Plane."""
    n = np.asarray(normal, dtype=float).reshape(3)
    norm = np.linalg.norm(n)
    if norm < 1e-12:
        raise DegenerateFit("zero-length plane normal")
    n = n / norm
    d = float(d) / norm
    for c in n:
        if abs(c) > SIGN_EPS:
            if c < 0.0:
                n, d = -n, -d
            break
    return Plane(n, d)


@dataclass(frozen=True)
class RansacConfig:
    max_iterations: int = 500
    inlier_threshold: float = 1.0  # mm, ~3 sigma of the canonical fixture noise
    min_inliers: int = 50
    rng_seed: int = 0
    refine: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.inlier_threshold <= 0.0:
            raise ValueError("inlier_threshold must be > 0")
        if self.min_inliers < 3:
            raise ValueError("min_inliers must be >= 3")


def _as_points(cloud):
    pts = getattr(cloud, "points", cloud)
    pts = np.asarray(pts, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("expected an (N, 3) point array")
    return pts


def fit_plane_lsq(points):
    """Least-squares plane through >= 3 points.

    The normal is the eigenvector of the centered covariance with the smallest
    eigenvalue; the plane passes through the centroid.
    """
    pts = _as_points(points)
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points, got {len(pts)}")
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    cov = centered.T @ centered
    evals, evecs = np.linalg.eigh(cov)  # ascending eigenvalues
    if evals[1] <= max(evals[2], 1.0) * 1e-12:
        raise DegenerateFit("points are collinear or coincident")
    normal = evecs[:, 0]
    return canonical_plane(normal, float(normal @ centroid))


def consensus_count(points, plane, threshold):
    """Number of points within `threshold` of `plane` (inclusive)."""
    return int((plane.distances(_as_points(points)) <= threshold).sum())


def ransac_plane(cloud, cfg, rng=None):
    """Single-plane RANSAC with optional least-squares refinement.

    Returns (plane, inlier_indices); the inlier set is exactly the points
    within cfg.inlier_threshold of the returned plane. Deterministic for a
    fixed cfg.rng_seed.
    """
    pts = _as_points(cloud)
    if len(pts) < max(3, cfg.min_inliers):
        raise ValueError(
            f"cloud has {len(pts)} points, need >= {max(3, cfg.min_inliers)}")
    if rng is None:
        rng = np.random.default_rng(cfg.rng_seed)

    best_count = 0
    best = None  # (normal, d)
    for _ in range(cfg.max_iterations):
        idx = rng.choice(len(pts), size=3, replace=False)
        a, b, c = pts[idx]
        n = np.cross(b - a, c - a)
        norm = np.linalg.norm(n)
        if norm < 1e-9:  # collinear sample
            continue
        n = n / norm
        d = float(n @ a)
        count = int((np.abs(pts @ n - d) <= cfg.inlier_threshold).sum())
        if count > best_count:
            best_count = count
            best = (n, d)

    if best is None or best_count < cfg.min_inliers:
        raise NoPlaneFound(
            f"best consensus {best_count} < min_inliers {cfg.min_inliers}")

    plane = canonical_plane(*best)
    if cfg.refine:
        inliers = np.nonzero(plane.distances(pts) <= cfg.inlier_threshold)[0]
        plane = fit_plane_lsq(pts[inliers])
    inliers = np.nonzero(plane.distances(pts) <= cfg.inlier_threshold)[0]
    return plane, inliers


def extract_planes(cloud, cfg):
    """Sequential RANSAC for exactly three pairwise non-parallel planes.

    Fit, remove inliers, repeat three times. Result order: the most horizontal
    plane (largest |normal . z|) first, then by descending inlier count.
    Raises NoThreePlanes when the scene does not contain three distinct
    plates (the cell cannot plan any weld in that case).
    """
    pts = _as_points(cloud)
    if len(pts) == 0:
        raise ValueError("empty cloud")
    rng = np.random.default_rng(cfg.rng_seed)

    found = []  # (plane, global_indices)
    remaining = np.arange(len(pts))
    for _ in range(3):
        if len(remaining) < max(3, cfg.min_inliers):
            raise NoThreePlanes(
                f"only {len(found)} plane(s) found before running out of points")
        try:
            plane, local = ransac_plane(pts[remaining], cfg, rng)
        except NoPlaneFound as exc:
            raise NoThreePlanes(f"only {len(found)} plane(s) found: {exc}") from exc
        for prior, _ in found:
            dot = abs(float(np.dot(prior.normal, plane.normal)))
            angle = np.degrees(np.arccos(np.clip(dot, -1.0, 1.0)))
            if angle <= MIN_PAIR_ANGLE_DEG:
                raise NoThreePlanes(
                    f"fitted plane parallel to an earlier one ({angle:.2f} deg)")
        found.append((plane, remaining[local]))
        keep = np.ones(len(remaining), dtype=bool)
        keep[local] = False
        remaining = remaining[keep]

    order = sorted(range(3), key=lambda i: -abs(found[i][0].normal[2]))
    first = order[0]
    rest = sorted((i for i in range(3) if i != first),
                  key=lambda i: -len(found[i][1]))
    return [found[i] for i in [first] + rest]
