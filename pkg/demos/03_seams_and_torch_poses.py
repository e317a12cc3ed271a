"""From fitted planes to weldable seams and torch poses.

Intersects the plates pairwise, anchors both seams at the triple corner,
measures the weldable extents from the inlier points, and builds the torch
frame (45 deg work angle for orthogonal plates, 10 deg travel angle).
"""

import numpy as np

from weldcell import planefind, scene, seamgeom

cloud, truth = scene.generate_structure(scene.u_canonical_spec(),
                                        scene.u_canonical_sampling())
fitted = planefind.extract_planes(cloud, planefind.RansacConfig())
planes = [p for p, _ in fitted]
inlier_points = [cloud.points[idx] for _, idx in fitted]

corner, seams = seamgeom.extract_seams(planes, inlier_points, cloud.points)
print(f"corner vertex: {corner.round(3)} mm "
      f"(truth {truth.corner.round(3)}, "
      f"error {np.linalg.norm(corner - truth.corner):.3f} mm)")

centroid = cloud.points.mean(axis=0)
for seam in seams:
    print(f"{seam.orientation_class} seam: direction {seam.direction.round(4)}, "
          f"weldable length {seam.length_max:.1f} mm "
          f"(plates {seam.plane_pair})")
    normals = tuple(seamgeom.outward_normal(planes[i], centroid)
                    for i in seam.plane_pair)
    pose = seamgeom.torch_pose_at(seam.corner, seam, normals,
                                  travel_sign=1, travel_angle=10.0)
    print(f"  work angle {pose.work_angle:.2f} deg, "
          f"travel angle {pose.travel_angle:.1f} deg")
    print(f"  travel axis   {pose.travel_axis.round(4)}")
    print(f"  approach axis {pose.approach_axis.round(4)}")

    # waypoints are extrapolated along the seam from the corner
    for dist in (0.0, seam.length_max / 2.0, seam.length_max):
        p = seamgeom.point_along_seam(seam.corner, seam.direction, dist)
        print(f"  t = {dist:6.1f} mm -> {p.round(2)}")
