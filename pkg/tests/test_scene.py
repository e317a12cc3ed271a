import numpy as np
import pytest

from weldcell import scene
from weldcell.errors import ParseError, WorkspaceViolation
from weldcell.geom3d import axis_angle


def small_spec(kind="L"):
    return scene.StructureSpec(kind=kind, horizontal_extent=300.0,
                               vertical_extent=200.0, plate_offsets=100.0)


def test_zero_noise_points_lie_exactly_on_their_planes():
    cloud, truth = scene.generate_structure(
        small_spec("L"), scene.SamplingSpec(points_per_plane=500))
    for label, plane in enumerate(truth.planes):
        pts = cloud.points[cloud.labels == label]
        assert np.max(plane.distances(pts)) == 0.0


def test_zero_noise_rms_is_zero_for_u_structure():
    cloud, truth = scene.generate_structure(
        small_spec("U"), scene.SamplingSpec(points_per_plane=400))
    sq = 0.0
    for label, plane in enumerate(truth.planes):
        sq += float((plane.distances(cloud.points[cloud.labels == label]) ** 2).sum())
    assert sq == 0.0


def test_workspace_bound_is_closed_at_900_by_700():
    scene.StructureSpec(kind="U", horizontal_extent=900.0, vertical_extent=700.0)
    with pytest.raises(WorkspaceViolation):
        scene.StructureSpec(kind="U", horizontal_extent=901.0, vertical_extent=700.0)
    with pytest.raises(WorkspaceViolation):
        scene.StructureSpec(kind="U", horizontal_extent=900.0, vertical_extent=701.0)


def test_fixed_seed_is_byte_identical():
    spec = scene.u_canonical_spec()
    sampling = scene.SamplingSpec(points_per_plane=2000, noise_sigma=0.3,
                                  outlier_fraction=0.1, rng_seed=42)
    a, _ = scene.generate_structure(spec, sampling)
    b, _ = scene.generate_structure(spec, sampling)
    assert a.points.tobytes() == b.points.tobytes()
    assert a.labels.tobytes() == b.labels.tobytes()


def test_noise_tail_fraction_under_half_percent(u_canonical):
    # empirical check on the generator's own truncated Gaussian draws
    cloud, truth = u_canonical
    sigma = scene.u_canonical_sampling().noise_sigma
    labeled = cloud.labels >= 0
    over = 0
    for label, plane in enumerate(truth.planes):
        d = plane.distances(cloud.points[cloud.labels == label])
        over += int((d > 3.0 * sigma).sum())
        assert np.max(d) <= 4.0 * sigma + 1e-12
    assert over / int(labeled.sum()) < 0.005


def test_outlier_count_is_exact_fixed_point():
    for frac in (0.0, 0.1, 0.2, 0.33, 0.49):
        sampling = scene.SamplingSpec(points_per_plane=500, outlier_fraction=frac,
                                      rng_seed=1)
        cloud, _ = scene.generate_structure(small_spec(), sampling)
        n_out = int((cloud.labels == -1).sum())
        assert n_out == round(frac * len(cloud))


def test_ground_truth_planes_span_space():
    _, truth = scene.generate_structure(
        scene.StructureSpec(kind="U", horizontal_extent=400.0, vertical_extent=300.0,
                            rotation=axis_angle([1.0, 2.0, 0.5], 25.0),
                            translation=[50.0, -20.0, 10.0]),
        scene.SamplingSpec(points_per_plane=100))
    normals = np.vstack([p.normal for p in truth.planes])
    assert abs(np.linalg.det(normals)) > 0.5
    for i in range(3):
        for j in range(i + 1, 3):
            assert abs(normals[i] @ normals[j]) < 0.17  # > 80 deg apart


def test_pose_transforms_cloud_rigidly():
    rot = axis_angle([0.3, 1.0, 0.2], 18.0)
    trans = np.array([120.0, 40.0, -30.0])
    sampling = scene.SamplingSpec(points_per_plane=800, noise_sigma=0.2,
                                  outlier_fraction=0.1, rng_seed=3)
    base, _ = scene.generate_structure(small_spec("U"), sampling)
    spec = scene.StructureSpec(kind="U", horizontal_extent=300.0,
                               vertical_extent=200.0, plate_offsets=100.0,
                               rotation=rot, translation=trans)
    moved, truth = scene.generate_structure(spec, sampling)
    np.testing.assert_allclose(moved.points, base.points @ rot.T + trans,
                               atol=1e-9)
    np.testing.assert_allclose(truth.corner, trans, atol=1e-12)


def test_labels_are_valid_and_counted():
    sampling = scene.SamplingSpec(points_per_plane=300, outlier_fraction=0.25,
                                  rng_seed=9)
    cloud, _ = scene.generate_structure(small_spec(), sampling)
    assert set(np.unique(cloud.labels)) == {-1, 0, 1, 2}
    for label in (0, 1, 2):
        assert int((cloud.labels == label).sum()) == 300


# --- file round trips -------------------------------------------------------

def tiny_cloud(labels=True):
    pts = np.array([[1.0, 2.0, 3.0], [4.5, -0.25, 0.125], [-7.0, 8.0, 9.0]])
    return scene.PointCloud(pts, np.array([0, 1, -1]) if labels else None)


@pytest.mark.parametrize("fmt,ext", [("ply", "ply"), ("csv", "csv")])
@pytest.mark.parametrize("labels", [True, False])
def test_save_load_round_trip(tmp_path, fmt, ext, labels):
    cloud = tiny_cloud(labels)
    path = tmp_path / f"c.{ext}"
    scene.save_cloud(cloud, path, fmt)
    back = scene.load_cloud(path)
    np.testing.assert_array_equal(back.points, cloud.points)
    if labels:
        np.testing.assert_array_equal(back.labels, cloud.labels)
    else:
        assert back.labels is None


def test_round_trip_preserves_noisy_coordinates(tmp_path):
    cloud, _ = scene.generate_structure(
        small_spec(), scene.SamplingSpec(points_per_plane=50, noise_sigma=0.4,
                                         rng_seed=11))
    for fmt in ("ply", "csv"):
        path = tmp_path / f"noisy.{fmt}"
        scene.save_cloud(cloud, path, fmt)
        back = scene.load_cloud(path)
        assert np.max(np.abs(back.points - cloud.points)) < 1e-6  # exact, in fact
        np.testing.assert_array_equal(back.points, cloud.points)


def test_csv_arity_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,z\n0.0,1.0,2.0\n1.0,2.0\n")
    with pytest.raises(ParseError) as err:
        scene.load_cloud(path)
    assert err.value.line == 3


def test_ply_count_mismatch_is_rejected(tmp_path):
    path = tmp_path / "bad.ply"
    path.write_text("ply\nformat ascii 1.0\nelement vertex 3\n"
                    "property float x\nproperty float y\nproperty float z\n"
                    "end_header\n0 0 0\n1 1 1\n")
    with pytest.raises(ParseError):
        scene.load_cloud(path)


def test_csv_bad_header_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n0,1,2\n")
    with pytest.raises(ParseError) as err:
        scene.load_cloud(path)
    assert err.value.line == 1
