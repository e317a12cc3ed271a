"""Shared fixtures: the canonical capture, fitted planes, live local cells."""

import numpy as np
import pytest

from weldcell import planefind, scene


@pytest.fixture(scope="session")
def u_canonical():
    """(cloud, truth) for the canonical U fixture (seed 7)."""
    return scene.generate_structure(scene.u_canonical_spec(),
                                    scene.u_canonical_sampling())


@pytest.fixture(scope="session")
def u_canonical_fitted(u_canonical):
    """extract_planes output on the canonical fixture (expensive, shared)."""
    cloud, _ = u_canonical
    return planefind.extract_planes(cloud, planefind.RansacConfig())


def match_to_truth(plane, truth_planes):
    """Ground-truth plane most aligned with a fitted plane, plus the errors."""
    best = None
    for gt in truth_planes:
        dot = abs(float(plane.normal @ gt.normal))
        angle = np.degrees(np.arccos(np.clip(dot, 0.0, 1.0)))
        if best is None or angle < best[0]:
            best = (angle, abs(plane.d - gt.d), gt)
    return best


def angle_deg(u, v):
    dot = float(np.clip(np.dot(u, v), -1.0, 1.0))
    return np.degrees(np.arccos(dot))


def exact_u_geometry(h_len=600.0, v_len=400.0, travel_angle=10.0):
    """Hand-built axis-aligned capture geometry (no fitting noise).

    Returns (seam_selections, torch_poses) for the canonical two-seam job:
    base plate z=0, seam wall y=0, second wall x=0, corner at the origin.
    """
    from weldcell import seamgeom

    h = seamgeom.SeamSegment(corner=np.zeros(3), direction=[1.0, 0.0, 0.0],
                             length_max=h_len, plane_pair=(0, 1),
                             orientation_class="horizontal")
    v = seamgeom.SeamSegment(corner=np.zeros(3), direction=[0.0, 0.0, 1.0],
                             length_max=v_len, plane_pair=(1, 2),
                             orientation_class="vertical")
    pose_h = seamgeom.torch_pose_at(h.corner, h, ([0, 0, 1], [0, 1, 0]),
                                    travel_sign=1, travel_angle=travel_angle)
    pose_v = seamgeom.torch_pose_at(v.corner, v, ([0, 1, 0], [1, 0, 0]),
                                    travel_sign=1, travel_angle=travel_angle)
    return [(h, h_len), (v, v_len)], [pose_h, pose_v]


def random_job_program(rng):
    """A generator-produced program over random seam geometry and schemes."""
    from weldcell import seamgeom, weldprog
    from weldcell.geom3d import axis_angle, unit

    def random_seam(vertical):
        while True:
            d = rng.normal(size=3)
            if np.linalg.norm(d) > 1e-6:
                d = d / np.linalg.norm(d)
                if (abs(d[2]) >= 0.5) == vertical:
                    break
        corner = rng.uniform(-100.0, 400.0, size=3)
        length_max = rng.uniform(20.0, 600.0)
        cls = "vertical" if vertical else "horizontal"
        seam = seamgeom.SeamSegment(corner=corner, direction=d,
                                    length_max=length_max, plane_pair=(0, 1),
                                    orientation_class=cls)
        n1 = rng.normal(size=3)
        n1 = unit(n1 - (n1 @ d) * d)
        n2 = axis_angle(d, rng.uniform(30.0, 150.0)) @ n1
        pose = seamgeom.torch_pose_at(corner, seam, (n1, n2),
                                      travel_sign=int(rng.choice([-1, 1])),
                                      travel_angle=rng.uniform(-20.0, 20.0))
        return (seam, rng.uniform(1.0, length_max)), pose

    selections, poses = [], []
    for vertical in rng.permutation([True, False])[:rng.integers(1, 3)]:
        sel, pose = random_seam(bool(vertical))
        selections.append(sel)
        poses.append(pose)
    params = weldprog.ProgramParams(weld_scheme=int(rng.integers(1, 9)),
                                    weave_scheme=int(rng.integers(0, 5)),
                                    simulate=bool(rng.integers(0, 2)))
    return weldprog.generate_program(
        selections, poses, params,
        approach_offset=float(rng.uniform(20.0, 80.0)),
        name=f"JOB_{rng.integers(0, 10**6)}")
