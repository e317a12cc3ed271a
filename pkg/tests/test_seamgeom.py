import numpy as np
import pytest

from weldcell import planefind, scene, seamgeom
from weldcell.errors import (DegenerateCorner, EmptySeam, ParallelPlanes,
                             UndefinedBisector)
from weldcell.geom3d import axis_angle
from weldcell.planefind import canonical_plane

from conftest import angle_deg

PLANE_Z0 = canonical_plane([0, 0, 1], 0.0)
PLANE_X0 = canonical_plane([1, 0, 0], 0.0)
PLANE_Y0 = canonical_plane([0, 1, 0], 0.0)


# --- plane intersections ------------------------------------------------------

def test_two_axis_planes_intersect_in_y_axis():
    line = seamgeom.intersect_two_planes(PLANE_Z0, PLANE_X0)
    np.testing.assert_allclose(line.origin, [0, 0, 0], atol=1e-12)
    assert abs(abs(line.direction[1]) - 1.0) < 1e-12


def test_parallel_planes_rejected():
    with pytest.raises(ParallelPlanes):
        seamgeom.intersect_two_planes(PLANE_Z0, canonical_plane([0, 0, 1], 5.0))


def test_oblique_intersection_satisfies_both_equations():
    rng = np.random.default_rng(3)
    for _ in range(25):
        a = canonical_plane(rng.normal(size=3), rng.uniform(-200, 200))
        b = canonical_plane(rng.normal(size=3), rng.uniform(-200, 200))
        if abs(a.normal @ b.normal) > 0.99:
            continue
        line = seamgeom.intersect_two_planes(a, b)
        for t in (0.0, 100.0):
            p = line.point_at(t)
            assert abs(a.normal @ p - a.d) < 1e-9
            assert abs(b.normal @ p - b.d) < 1e-9


def test_three_axis_planes_meet_at_origin():
    corner = seamgeom.intersect_three_planes(PLANE_X0, PLANE_Y0, PLANE_Z0)
    np.testing.assert_allclose(corner, [0, 0, 0], atol=1e-12)


def test_three_shifted_planes_meet_at_abc():
    a, b, c = 12.5, -3.0, 40.0
    corner = seamgeom.intersect_three_planes(
        canonical_plane([1, 0, 0], a), canonical_plane([0, 1, 0], b),
        canonical_plane([0, 0, 1], c))
    np.testing.assert_allclose(corner, [a, b, c], atol=1e-12)


def test_degenerate_corner_two_parallel():
    with pytest.raises(DegenerateCorner):
        seamgeom.intersect_three_planes(
            PLANE_Z0, canonical_plane([0, 0, 1], 5.0), PLANE_X0)


def test_fitted_corner_within_1mm_of_truth(u_canonical, u_canonical_fitted):
    _, truth = u_canonical
    planes = [p for p, _ in u_canonical_fitted]
    corner = seamgeom.intersect_three_planes(*planes)
    assert np.linalg.norm(corner - truth.corner) < 1.0


# --- seam extents ----------------------------------------------------------------

def zero_noise_fixture():
    spec = scene.u_canonical_spec()
    sampling = scene.SamplingSpec(points_per_plane=15000, noise_sigma=0.0,
                                  outlier_fraction=0.0, rng_seed=7)
    return spec, scene.generate_structure(spec, sampling)


def test_extent_matches_patch_length_zero_noise():
    spec, (cloud, truth) = zero_noise_fixture()
    line = seamgeom.Line3(truth.corner, truth.seam_dirs[0])
    a = cloud.points[cloud.labels == 0]
    b = cloud.points[cloud.labels == 1]
    t_min, t_max = seamgeom.seam_extent(line, a, b, band=5.0)
    assert t_max - t_min == pytest.approx(spec.horizontal_extent, abs=2.0)


def test_extent_density_independent():
    spec = scene.u_canonical_spec()
    lengths = []
    for ppp in (15000, 30000):
        sampling = scene.SamplingSpec(points_per_plane=ppp, noise_sigma=0.0,
                                      outlier_fraction=0.0, rng_seed=7)
        cloud, truth = scene.generate_structure(spec, sampling)
        line = seamgeom.Line3(truth.corner, truth.seam_dirs[0])
        t_min, t_max = seamgeom.seam_extent(
            line, cloud.points[cloud.labels == 0], cloud.points[cloud.labels == 1],
            band=5.0)
        lengths.append(t_max - t_min)
    assert abs(lengths[0] - lengths[1]) <= 1.0


def test_empty_band_raises():
    line = seamgeom.Line3([0, 0, 0], [1, 0, 0])
    offside = np.array([[0.0, 50.0, 0.0], [10.0, 60.0, 2.0]])
    with pytest.raises(EmptySeam):
        seamgeom.seam_extent(line, offside, offside, band=0.5)


def test_stray_far_points_do_not_stretch_the_extent():
    line = seamgeom.Line3([0, 0, 0], [1, 0, 0])
    dense = np.column_stack([np.linspace(0, 100, 201),
                             np.zeros(201), np.zeros(201)])
    stray = np.array([[500.0, 0.0, 0.0]])  # inlier of the infinite plane, off-patch
    t_min, t_max = seamgeom.seam_extent(line, dense, stray, band=5.0, gap_tol=15.0)
    assert t_max == pytest.approx(100.0)


# --- points along the seam ---------------------------------------------------------

def test_point_along_seam_basics():
    corner = np.array([1.0, 2.0, 3.0])
    np.testing.assert_array_equal(
        seamgeom.point_along_seam(corner, [0, 1, 0], 0.0), corner)
    np.testing.assert_allclose(
        seamgeom.point_along_seam(corner, [0, 1, 0], 100.0), [1, 102, 3])
    with pytest.raises(ValueError):
        seamgeom.point_along_seam(corner, [0, 1, 0], -1.0)


def test_point_along_seam_additive():
    rng = np.random.default_rng(8)
    corner = rng.normal(size=3)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    for t1, t2 in rng.uniform(0, 300, size=(20, 2)):
        two_steps = seamgeom.point_along_seam(
            seamgeom.point_along_seam(corner, direction, t1), direction, t2)
        one_step = seamgeom.point_along_seam(corner, direction, t1 + t2)
        np.testing.assert_allclose(two_steps, one_step, atol=1e-9)


def test_extrapolated_point_stays_on_fitted_planes(u_canonical, u_canonical_fitted):
    cloud, _ = u_canonical
    planes = [p for p, _ in u_canonical_fitted]
    inl = [cloud.points[i] for _, i in u_canonical_fitted]
    corner, seams = seamgeom.extract_seams(planes, inl, cloud.points)
    seam = seams[0]
    for dist in (50.0, 300.0, seam.length_max):
        p = seamgeom.point_along_seam(seam.corner, seam.direction, dist)
        for k in seam.plane_pair:
            assert planes[k].distances(p[None, :])[0] < 1.0  # fit tolerance


# --- torch poses --------------------------------------------------------------------

def make_seam(direction, length=100.0):
    direction = np.asarray(direction, dtype=float)
    cls = "horizontal" if abs(direction[2]) < 0.5 else "vertical"
    return seamgeom.SeamSegment(corner=np.zeros(3), direction=direction,
                                length_max=length, plane_pair=(0, 1),
                                orientation_class=cls)


def test_orthogonal_plates_give_45_degree_bisector():
    seam = make_seam([0, 1, 0])
    pose = seamgeom.torch_pose_at(np.zeros(3), seam, ([0, 0, 1], [1, 0, 0]),
                                  travel_sign=1, travel_angle=0.0)
    expected = -np.array([1.0, 0.0, 1.0]) / np.sqrt(2.0)
    np.testing.assert_allclose(pose.approach_axis, expected, atol=1e-12)
    assert angle_deg(pose.approach_axis, [0, 0, -1]) == pytest.approx(45.0)
    assert angle_deg(pose.approach_axis, [-1, 0, 0]) == pytest.approx(45.0)
    assert pose.work_angle == pytest.approx(45.0)


def test_travel_sign_flip_negates_travel_keeps_approach():
    seam = make_seam([0, 1, 0])
    fwd = seamgeom.torch_pose_at(np.zeros(3), seam, ([0, 0, 1], [1, 0, 0]),
                                 travel_sign=1, travel_angle=0.0)
    rev = seamgeom.torch_pose_at(np.zeros(3), seam, ([0, 0, 1], [1, 0, 0]),
                                 travel_sign=-1, travel_angle=0.0)
    np.testing.assert_allclose(rev.travel_axis, -fwd.travel_axis, atol=1e-12)
    np.testing.assert_allclose(rev.approach_axis, fwd.approach_axis, atol=1e-12)


def test_120_degree_dihedral_gives_60_degree_work_angle():
    # plates opened to a 120 deg wedge: outward normals 180 - 120 = 60 deg apart
    n1 = np.array([0.0, 0.0, 1.0])          # base outward
    n2 = axis_angle([0, 1, 0], -60.0) @ n1  # wall outward
    seam = make_seam([0, 1, 0])
    pose = seamgeom.torch_pose_at(np.zeros(3), seam, (n1, n2),
                                  travel_sign=1, travel_angle=0.0)
    assert pose.work_angle == pytest.approx(60.0)
    a1 = angle_deg(pose.approach_axis, n1)
    a2 = angle_deg(pose.approach_axis, n2)
    assert abs(a1 - a2) < 1e-6


def test_antiparallel_normals_rejected():
    seam = make_seam([0, 1, 0])
    with pytest.raises(UndefinedBisector):
        seamgeom.torch_pose_at(np.zeros(3), seam, ([0, 0, 1], [0, 0, -1]))


def test_pose_frames_orthonormal_for_random_geometry():
    rng = np.random.default_rng(12)
    for _ in range(100):
        direction = rng.normal(size=3)
        direction /= np.linalg.norm(direction)
        n1 = rng.normal(size=3)
        n1 -= (n1 @ direction) * direction
        n1 /= np.linalg.norm(n1)
        open_angle = rng.uniform(20.0, 160.0)
        n2 = axis_angle(direction, open_angle) @ n1
        seam = make_seam(direction)
        pose = seamgeom.torch_pose_at(np.zeros(3), seam, (n1, n2),
                                      travel_sign=rng.choice([-1, 1]),
                                      travel_angle=rng.uniform(-25, 25))
        rot = pose.rotation
        np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-9)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-9)
        assert abs(pose.approach_axis @ pose.travel_axis) < 1e-9


# --- seam assembly -------------------------------------------------------------------

def test_extract_seams_on_canonical_fixture(u_canonical, u_canonical_fitted):
    cloud, truth = u_canonical
    spec = scene.u_canonical_spec()
    planes = [p for p, _ in u_canonical_fitted]
    inl = [cloud.points[i] for _, i in u_canonical_fitted]
    corner, seams = seamgeom.extract_seams(planes, inl, cloud.points)
    h, v = seams
    assert h.orientation_class == "horizontal"
    assert v.orientation_class == "vertical"
    assert angle_deg(h.direction, truth.seam_dirs[0]) < 0.5
    assert angle_deg(v.direction, truth.seam_dirs[1]) < 0.5
    assert h.length_max == pytest.approx(spec.horizontal_extent, abs=2.0)
    assert v.length_max == pytest.approx(spec.vertical_extent, abs=2.0)


def test_outward_normal_points_toward_reference():
    plane = canonical_plane([0, 0, 1], 0.0)
    up = seamgeom.outward_normal(plane, [0, 0, 10.0])
    down = seamgeom.outward_normal(plane, [0, 0, -10.0])
    np.testing.assert_allclose(up, [0, 0, 1])
    np.testing.assert_allclose(down, [0, 0, -1])
