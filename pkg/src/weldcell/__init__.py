"""weldcell: desk-scale planning and simulation stack for online-programmed
robotic fillet welding.

Pipeline: synthetic 3D capture -> RANSAC plane extraction -> seam/torch
geometry -> robot program generation -> bus-driven transfer and simulated
execution, with job logging and a key-step timing harness.
"""

__version__ = "0.1.0"

from . import (calib, geom3d, handler, msgbus, operator_cli, planefind,
               robotsim, scene, seamgeom, weldprog)
from .errors import WeldCellError

__all__ = [
    "WeldCellError", "calib", "geom3d", "handler", "msgbus", "operator_cli",
    "planefind", "robotsim", "scene", "seamgeom", "weldprog",
]
