import numpy as np
import pytest

from weldcell import calib
from weldcell.errors import DegenerateOrientation, UnderdeterminedCalibration
from weldcell.geom3d import axis_angle


def distinct_rotations(rng, count, min_angle_deg=30.0):
    """Random rotations with pairwise geodesic separation above min_angle."""
    rots = []
    while len(rots) < count:
        cand = axis_angle(rng.normal(size=3), rng.uniform(0.0, 180.0))
        ok = True
        for r in rots:
            rel = r.T @ cand
            angle = np.degrees(np.arccos(np.clip((np.trace(rel) - 1) / 2, -1, 1)))
            if angle < min_angle_deg:
                ok = False
                break
        if ok:
            rots.append(cand)
    return rots


def touch_poses(offset, pivot, rotations, rng=None, sigma=0.0):
    """Forward-generate flange poses touching `pivot` with tool offset."""
    poses = []
    for rot in rotations:
        pos = pivot - rot @ offset
        if sigma > 0.0:
            pos = pos + rng.normal(0.0, sigma, size=3)
        poses.append(calib.FlangePose(position=pos, rotation=rot))
    return poses


TRUE_OFFSET = np.array([151.0, 12.5, 88.0])
TRUE_PIVOT = np.array([620.0, -140.0, 55.0])


def test_exact_data_recovers_offset_to_micron():
    rng = np.random.default_rng(1)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 4))
    offset, pivot, residual = calib.solve_tcp_offset(poses)
    assert np.max(np.abs(offset - TRUE_OFFSET)) < 1e-6
    assert np.max(np.abs(pivot - TRUE_PIVOT)) < 1e-6
    assert residual < 1e-9


def test_three_poses_suffice():
    rng = np.random.default_rng(2)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 3))
    offset, _, residual = calib.solve_tcp_offset(poses)
    assert np.max(np.abs(offset - TRUE_OFFSET)) < 1e-6
    assert residual < 1e-9


def test_identical_rotations_underdetermined():
    rot = axis_angle([0, 0, 1], 25.0)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, [rot, rot, rot])
    with pytest.raises(UnderdeterminedCalibration):
        calib.solve_tcp_offset(poses)


def test_too_few_samples_rejected():
    rng = np.random.default_rng(3)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 2))
    with pytest.raises(ValueError):
        calib.solve_tcp_offset(poses)


def test_noisy_monte_carlo_95th_percentile_below_1mm():
    sigma = 0.1
    errors, residuals = [], []
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 4),
                            rng=rng, sigma=sigma)
        offset, _, residual = calib.solve_tcp_offset(poses)
        errors.append(float(np.linalg.norm(offset - TRUE_OFFSET)))
        residuals.append(residual)
    assert np.percentile(errors, 95) <= 1.0
    assert 0.2 * sigma < np.median(residuals) < 3.0 * sigma  # residual ~ sigma


def test_fourth_consistent_sample_keeps_residual_tiny():
    rng = np.random.default_rng(4)
    rots = distinct_rotations(rng, 4)
    three = touch_poses(TRUE_OFFSET, TRUE_PIVOT, rots[:3])
    four = touch_poses(TRUE_OFFSET, TRUE_PIVOT, rots)
    _, _, r3 = calib.solve_tcp_offset(three)
    _, _, r4 = calib.solve_tcp_offset(four)
    assert r3 < 1e-9 and r4 < 1e-9


def test_translation_equivariance():
    rng = np.random.default_rng(5)
    rots = distinct_rotations(rng, 4)
    shift = np.array([-33.0, 71.0, 4.0])
    base = touch_poses(TRUE_OFFSET, TRUE_PIVOT, rots)
    moved = [calib.FlangePose(p.position + shift, p.rotation) for p in base]
    off_a, piv_a, _ = calib.solve_tcp_offset(base)
    off_b, piv_b, _ = calib.solve_tcp_offset(moved)
    np.testing.assert_allclose(off_b, off_a, atol=1e-9)
    np.testing.assert_allclose(piv_b, piv_a + shift, atol=1e-9)


# --- orientation part ------------------------------------------------------------

def test_axis_aligned_points_give_identity():
    rot = calib.solve_tool_orientation([0, 0, 0], [1, 0, 0], [0, 0, 1])
    np.testing.assert_allclose(rot, np.eye(3), atol=1e-12)


def test_collinear_orientation_points_rejected():
    with pytest.raises(DegenerateOrientation):
        calib.solve_tool_orientation([0, 0, 0], [1, 0, 0], [2, 0, 0])
    with pytest.raises(DegenerateOrientation):
        calib.solve_tool_orientation([0, 0, 0], [0, 0, 0], [0, 0, 1])


def test_random_triples_give_orthonormal_aligned_frames():
    rng = np.random.default_rng(6)
    for _ in range(50):
        origin = rng.normal(scale=100, size=3)
        x_point = origin + rng.normal(size=3)
        z_point = origin + rng.normal(size=3)
        dx = x_point - origin
        if np.linalg.norm(np.cross(dx, z_point - origin)) < 1e-6:
            continue
        rot = calib.solve_tool_orientation(origin, x_point, z_point)
        np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-12)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-12)
        cross = np.cross(rot[:, 0], dx / np.linalg.norm(dx))
        assert np.linalg.norm(cross) < 1e-12  # x axis parallel to dx


def test_solve_tool_frame_combines_parts():
    rng = np.random.default_rng(7)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 4))
    frame = calib.solve_tool_frame(poses, orient_origin=[0, 0, 0],
                                   x_point=[0, 1, 0], z_point=[0, 0, 1])
    assert np.max(np.abs(frame.offset - TRUE_OFFSET)) < 1e-6
    np.testing.assert_allclose(frame.rotation[:, 0], [0, 1, 0], atol=1e-12)


def test_load_poses_csv(tmp_path):
    rng = np.random.default_rng(8)
    poses = touch_poses(TRUE_OFFSET, TRUE_PIVOT, distinct_rotations(rng, 3))
    path = tmp_path / "poses.csv"
    rows = []
    for p in poses:
        rows.append(",".join(repr(float(v)) for v in
                             [*p.position, *p.rotation.ravel()]))
    path.write_text("\n".join(rows) + "\n")
    loaded = calib.load_poses_csv(path)
    assert len(loaded) == 3
    np.testing.assert_allclose(loaded[0].rotation, poses[0].rotation)
    offset, _, _ = calib.solve_tcp_offset(loaded)
    assert np.max(np.abs(offset - TRUE_OFFSET)) < 1e-6
