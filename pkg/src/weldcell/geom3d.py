"""Small shared 3D helpers: vectors, rotation matrices, w/p/r angles, slerp.

Conventions: right-handed frames, millimeters, column-vector rotation
matrices. Tool orientation in position registers uses Fanuc-style fixed-axis
w/p/r degrees: R = Rz(r) @ Ry(p) @ Rx(w), i.e. roll about world X, pitch about
world Y, yaw about world Z.
"""

import math

import numpy as np


def vec3(x, y=None, z=None):
    """Coerce input to a float64 (3,) array."""
    if y is None:
        a = np.asarray(x, dtype=float).reshape(3)
    else:
        a = np.array([x, y, z], dtype=float)
    return a


def unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    if n < 1e-12:
        raise ValueError("cannot normalize a near-zero vector")
    return v / n


def angle_between_deg(a, b):
    """Angle between two vectors in degrees."""
    c = float(np.clip(np.dot(unit(a), unit(b)), -1.0, 1.0))
    return math.degrees(math.acos(c))


def rot_x(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(deg):
    c, s = math.cos(math.radians(deg)), math.sin(math.radians(deg))
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def axis_angle(axis, deg):
    """Rodrigues rotation matrix about `axis` by `deg` degrees."""
    k = unit(axis)
    th = math.radians(deg)
    kx = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    return np.eye(3) + math.sin(th) * kx + (1.0 - math.cos(th)) * (kx @ kx)


def rotation_from_wpr(w, p, r):
    """Fixed-axis w/p/r degrees to rotation matrix."""
    return rot_z(r) @ rot_y(p) @ rot_x(w)


def wpr_from_rotation(rot):
    """Rotation matrix to fixed-axis w/p/r degrees (inverse of above)."""
    rot = np.asarray(rot, dtype=float)
    cy = math.hypot(rot[0, 0], rot[1, 0])
    if cy > 1e-9:
        w = math.atan2(rot[2, 1], rot[2, 2])
        p = math.atan2(-rot[2, 0], cy)
        r = math.atan2(rot[1, 0], rot[0, 0])
    else:
        # gimbal: pitch at +-90 deg, roll/yaw degenerate; push all into w
        w = math.atan2(-rot[1, 2], rot[1, 1])
        p = math.atan2(-rot[2, 0], cy)
        r = 0.0
    return math.degrees(w), math.degrees(p), math.degrees(r)


def is_rotation(rot, tol=1e-9):
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        return False
    if not np.allclose(rot.T @ rot, np.eye(3), atol=tol):
        return False
    return abs(np.linalg.det(rot) - 1.0) <= max(tol, 1e-9)


def quat_from_matrix(rot):
    """Unit quaternion (w, x, y, z) from a rotation matrix."""
    m = np.asarray(rot, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0.0:
        s = math.sqrt(tr + 1.0) * 2.0
        q = np.array([0.25 * s, (m[2, 1] - m[1, 2]) / s,
                      (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s])
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
        q = np.array([(m[2, 1] - m[1, 2]) / s, 0.25 * s,
                      (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s])
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
        q = np.array([(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
                      0.25 * s, (m[1, 2] + m[2, 1]) / s])
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        q = np.array([(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                      (m[1, 2] + m[2, 1]) / s, 0.25 * s])
    return q / np.linalg.norm(q)


def matrix_from_quat(q):
    w, x, y, z = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def slerp(rot_a, rot_b, frac):
    """Spherical interpolation between two rotation matrices, frac in [0, 1]."""
    qa = quat_from_matrix(rot_a)
    qb = quat_from_matrix(rot_b)
    dot = float(np.dot(qa, qb))
    if dot < 0.0:  # take the short arc
        qb, dot = -qb, -dot
    if dot > 1.0 - 1e-10:
        q = qa + frac * (qb - qa)
    else:
        th = math.acos(min(1.0, dot))
        q = (math.sin((1.0 - frac) * th) * qa + math.sin(frac * th) * qb) / math.sin(th)
    return matrix_from_quat(q)
