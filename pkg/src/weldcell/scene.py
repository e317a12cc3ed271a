"""Synthetic structured-light captures of L- and U-shaped fillet structures.

Both structure kinds are modeled as three planar plates sharing one corner:
a horizontal base plate plus two upright plates, giving one horizontal fillet
seam (along the base/front-wall junction) and one vertical seam (along the
wall/wall junction). Points are sampled on a regular, edge-inclusive grid per
plate — a stand-in for the camera's pixel grid — then displaced along the
plate normal by truncated Gaussian depth noise. Outliers are uniform in a box
20% larger than the structure. Everything is generated in the structure-local
frame and rigidly transformed by the structure pose, so a fixed seed yields
clouds that are exact rigid images of each other across poses.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, WorkspaceViolation
from .planefind import Plane, canonical_plane

WORKSPACE_X_MM = 900.0  # horizontal work-area limit
WORKSPACE_Z_MM = 700.0  # vertical work-area limit

_X = np.array([1.0, 0.0, 0.0])
_Y = np.array([0.0, 1.0, 0.0])
_Z = np.array([0.0, 0.0, 1.0])


@dataclass
class PointCloud:
    """(N, 3) float64 points in mm, optional per-point plane labels.

    Labels are ground truth from the generator: 0..2 = plate index,
    -1 = outlier. Loaded real-world clouds have labels = None.
    """

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be an (N, 3) array")
        if not np.isfinite(pts).all():
            raise ValueError("points must be finite")
        self.points = pts
        if self.labels is not None:
            lab = np.asarray(self.labels, dtype=int)
            if lab.shape != (len(pts),):
                raise ValueError("labels must match point count")
            if not np.isin(lab, (-1, 0, 1, 2)).all():
                raise ValueError("labels must be in {-1, 0, 1, 2}")
            self.labels = lab

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class StructureSpec:
    """Plate extents (mm) and rigid pose of the structure in camera frame."""

    kind: str  # "L" or "U"
    horizontal_extent: float  # length of the horizontal seam plate, x
    vertical_extent: float    # height of the upright plates, z
    plate_offsets: float = 200.0  # lateral depth of base plate / second wall
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.kind not in ("L", "U"):
            raise ValueError("kind must be 'L' or 'U'")
        if min(self.horizontal_extent, self.vertical_extent, self.plate_offsets) <= 0:
            raise ValueError("extents must be positive")
        if self.horizontal_extent > WORKSPACE_X_MM or self.vertical_extent > WORKSPACE_Z_MM:
            raise WorkspaceViolation(
                f"{self.horizontal_extent:.0f} x {self.vertical_extent:.0f} mm exceeds "
                f"the {WORKSPACE_X_MM:.0f} x {WORKSPACE_Z_MM:.0f} mm work area")
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=float))
        object.__setattr__(self, "translation",
                           np.asarray(self.translation, dtype=float).reshape(3))


@dataclass(frozen=True)
class SamplingSpec:
    points_per_plane: int
    noise_sigma: float = 0.0      # mm, along the plate normal
    outlier_fraction: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.points_per_plane < 3:
            raise ValueError("points_per_plane must be >= 3")
        if not 0.0 <= self.outlier_fraction < 0.5:
            raise ValueError("outlier_fraction must be in [0, 0.5)")
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")


@dataclass
class GroundTruth:
    """Generator-side truth for test oracles."""

    planes: list  # [base, seam wall, second wall] as canonical Plane
    corner: np.ndarray
    seam_dirs: list  # [horizontal seam dir, vertical seam dir], unit


def _patches(spec):
    """(origin, u_axis, v_axis, u_len, v_len, normal) per plate, local frame."""
    h, v, offs = spec.horizontal_extent, spec.vertical_extent, spec.plate_offsets
    # an L is a corner bracket: same topology, narrower closing wall
    wall_b_depth = offs if spec.kind == "U" else 0.5 * offs
    zero = np.zeros(3)
    return [
        (zero, _X, _Y, h, offs, _Z),          # base plate, z = 0
        (zero, _X, _Z, h, v, _Y),             # seam wall, y = 0
        (zero, _Y, _Z, wall_b_depth, v, _X),  # second wall, x = 0
    ]


def _grid_sample(u_len, v_len, count, rng):
    """Exactly `count` points on an edge-inclusive regular grid over the patch."""
    nu = max(2, round(math.sqrt(count * u_len / v_len)))
    nv = max(2, math.ceil(count / nu))
    us, vs = np.meshgrid(np.linspace(0.0, u_len, nu),
                         np.linspace(0.0, v_len, nv), indexing="ij")
    uv = np.column_stack([us.ravel(), vs.ravel()])
    excess = len(uv) - count
    if excess > 0:
        drop = rng.choice(len(uv), size=excess, replace=False)
        keep = np.ones(len(uv), dtype=bool)
        keep[drop] = False
        uv = uv[keep]
    return uv


def _truncated_normal(sigma, count, rng):
    """Gaussian draws redrawn until all lie within +-4 sigma."""
    draws = rng.normal(0.0, sigma, size=count)
    bad = np.abs(draws) > 4.0 * sigma
    while bad.any():
        draws[bad] = rng.normal(0.0, sigma, size=int(bad.sum()))
        bad = np.abs(draws) > 4.0 * sigma
    return draws


def _outlier_count(planar_total, fraction):
    """Smallest fixed point of n = round(fraction * (planar_total + n))."""
    if fraction == 0.0:
        return 0
    n = round(fraction * planar_total / (1.0 - fraction))
    for _ in range(100):
        nxt = round(fraction * (planar_total + n))
        if nxt == n:
            break
        n = nxt
    return n


def generate_structure(spec, sampling):
    """Synthesize a labeled capture of the structure plus its ground truth.

    Returns (PointCloud, GroundTruth). Bit-reproducible for a fixed seed.
    """
    rng = np.random.default_rng(sampling.rng_seed)
    patches = _patches(spec)

    chunks, labels = [], []
    for idx, (origin, u_ax, v_ax, u_len, v_len, normal) in enumerate(patches):
        uv = _grid_sample(u_len, v_len, sampling.points_per_plane, rng)
        pts = origin + np.outer(uv[:, 0], u_ax) + np.outer(uv[:, 1], v_ax)
        if sampling.noise_sigma > 0.0:
            depth = _truncated_normal(sampling.noise_sigma, len(pts), rng)
            pts = pts + np.outer(depth, normal)
        chunks.append(pts)
        labels.append(np.full(len(pts), idx, dtype=int))

    planar = np.vstack(chunks)
    n_out = _outlier_count(len(planar), sampling.outlier_fraction)
    if n_out > 0:
        hi = np.array([spec.horizontal_extent, spec.plate_offsets,
                       spec.vertical_extent])
        lo = np.zeros(3)
        center, half = (lo + hi) / 2.0, (hi - lo) / 2.0 * 1.2
        outliers = rng.uniform(center - half, center + half, size=(n_out, 3))
        points = np.vstack([planar, outliers])
        labels.append(np.full(n_out, -1, dtype=int))
    else:
        points = planar

    rot, trans = spec.rotation, spec.translation
    points = points @ rot.T + trans

    def world_plane(local_normal):
        n = rot @ local_normal
        return canonical_plane(n, float(n @ trans))

    truth = GroundTruth(
        planes=[world_plane(_Z), world_plane(_Y), world_plane(_X)],
        corner=trans.copy(),
        seam_dirs=[rot @ _X, rot @ _Z],
    )
    return PointCloud(points, np.concatenate(labels)), truth


def u_canonical_spec():
    """The U fixture used throughout acceptance: 600 mm h-seam, 400 mm v-seam."""
    return StructureSpec(kind="U", horizontal_extent=600.0, vertical_extent=400.0,
                         plate_offsets=200.0)


def u_canonical_sampling(seed=7):
    """50k points total: 3 x 15k on plates + 5k outliers, sigma 0.3 mm."""
    return SamplingSpec(points_per_plane=15000, noise_sigma=0.3,
                        outlier_fraction=0.1, rng_seed=seed)


# --- file I/O ---------------------------------------------------------------

def save_cloud(cloud, path, fmt="ply"):
    """Write a cloud as ascii PLY or CSV. Floats keep full precision."""
    fmt = fmt.lower()
    has_labels = cloud.labels is not None
    lines = []
    if fmt.startswith("ply"):
        lines += ["ply", "format ascii 1.0",
                  f"element vertex {len(cloud)}",
                  "property float x", "property float y", "property float z"]
        if has_labels:
            lines.append("property int label")
        lines.append("end_header")
        for i, p in enumerate(cloud.points):
            row = f"{float(p[0])!r} {float(p[1])!r} {float(p[2])!r}"
            if has_labels:
                row += f" {int(cloud.labels[i])}"
            lines.append(row)
    elif fmt == "csv":
        lines.append("x,y,z,label" if has_labels else "x,y,z")
        for i, p in enumerate(cloud.points):
            row = f"{float(p[0])!r},{float(p[1])!r},{float(p[2])!r}"
            if has_labels:
                row += f",{int(cloud.labels[i])}"
            lines.append(row)
    else:
        raise ValueError(f"unknown format {fmt!r} (use 'ply' or 'csv')")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_cloud(path):
    """Read a cloud written by save_cloud (format sniffed from content)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].strip() == "ply":
        return _parse_ply(lines)
    return _parse_csv(lines)


def _parse_ply(lines):
    count = None
    props = []
    body_start = None
    for i, line in enumerate(lines[1:], start=2):
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "element":
            if len(tok) != 3 or tok[1] != "vertex":
                raise ParseError(f"unsupported element {line!r}", line=i)
            count = int(tok[2])
        elif tok[0] == "property":
            props.append(tok[-1])
        elif tok[0] == "end_header":
            body_start = i + 1
            break
        elif tok[0] not in ("format", "comment"):
            raise ParseError(f"unexpected header line {line!r}", line=i)
    if count is None or body_start is None:
        raise ParseError("missing element vertex declaration or end_header", line=1)
    if props[:3] != ["x", "y", "z"]:
        raise ParseError("vertex must declare properties x y z", line=1)
    has_labels = "label" in props

    rows = [(i, line) for i, line in enumerate(lines[body_start - 1:], start=body_start)
            if line.strip()]
    if len(rows) != count:
        bad_line = rows[count][0] if len(rows) > count else len(lines)
        raise ParseError(f"declared {count} vertices, found {len(rows)}",
                         line=bad_line)
    return _rows_to_cloud(rows, has_labels, sep=None)


def _parse_csv(lines):
    if not lines:
        raise ParseError("empty file", line=1)
    header = [h.strip() for h in lines[0].split(",")]
    if header == ["x", "y", "z"]:
        has_labels = False
    elif header == ["x", "y", "z", "label"]:
        has_labels = True
    else:
        raise ParseError(f"bad header {lines[0]!r}", line=1)
    rows = [(i, line) for i, line in enumerate(lines[1:], start=2) if line.strip()]
    return _rows_to_cloud(rows, has_labels, sep=",")


def _rows_to_cloud(rows, has_labels, sep):
    width = 4 if has_labels else 3
    pts = np.empty((len(rows), 3))
    labels = np.empty(len(rows), dtype=int) if has_labels else None
    for k, (lineno, line) in enumerate(rows):
        fields = line.split(sep)  # sep=None means any whitespace (PLY rows)
        if len(fields) != width:
            raise ParseError(f"expected {width} fields, got {len(fields)}",
                             line=lineno)
        try:
            pts[k] = [float(fields[0]), float(fields[1]), float(fields[2])]
            if has_labels:
                labels[k] = int(fields[3])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    return PointCloud(pts, labels)
