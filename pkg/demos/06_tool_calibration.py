"""Six-point tool calibration, simulated.

The torch tip touches one fixed point under four distinct flange
orientations; the stacked least squares recovers the tool offset and the
pivot. Three more jogged points (orient origin, X, Z) fix the tool axes.
"""

import numpy as np

from weldcell import calib
from weldcell.geom3d import axis_angle

true_offset = np.array([142.0, 8.0, 96.0])   # torch tip in the flange frame
pivot = np.array([615.0, -80.0, 25.0])       # the touched point, world frame

rotations = [axis_angle([0, 0, 1], 15.0), axis_angle([0, 1, 0], 65.0),
             axis_angle([1, 0, 0], -50.0), axis_angle([1, 1, 0], 120.0)]
poses = [calib.FlangePose(position=pivot - rot @ true_offset, rotation=rot)
         for rot in rotations]

offset, reference, residual = calib.solve_tcp_offset(poses)
print(f"true offset      : {true_offset}")
print(f"recovered offset : {offset.round(9)}")
print(f"pivot point      : {reference.round(9)} (true {pivot})")
print(f"touch residual   : {residual:.2e} mm")

# with 0.1 mm touch noise the offset stays within a millimeter
rng = np.random.default_rng(0)
noisy = [calib.FlangePose(p.position + rng.normal(0, 0.1, 3), p.rotation)
         for p in poses]
offset_n, _, residual_n = calib.solve_tcp_offset(noisy)
print(f"with 0.1 mm noise: error {np.linalg.norm(offset_n - true_offset):.3f} mm, "
      f"residual {residual_n:.3f} mm")

rotation = calib.solve_tool_orientation(
    orient_origin=[0.0, 0.0, 0.0], x_point=[0.8, 0.0, 0.6], z_point=[0.0, 0.0, 1.0])
print("tool axes (columns = x, y, z):")
print(rotation.round(6))
