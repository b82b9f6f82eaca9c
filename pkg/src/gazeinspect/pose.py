"""5-DOF camera pose (3D position + pan/tilt) that frames an estimated defect.

The camera viewing direction is R_y(pan) @ R_x(tilt) @ [0,0,1]; for defects
on walls it reproduces the opposite of the averaged surface normal, and the
camera is backed off along it far enough that the defect's reference extent,
scaled by a safety factor, fills the matching field of view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .defect import DefectEstimate, SurfaceOrientation, VERTICAL_TILT_DEG
from .geometry import DegenerateGeometry, rot_x, rot_y


class DistanceFormula(str, Enum):
    """How the standoff distance relates the extent to the field of view.

    GEOMETRIC is the pinhole relation d = (L/2) / tan(fov/2) * SF: the frame
    at distance d spans exactly SF times the reference extent. TAN_SCALED is
    an alternate variant that multiplies by tan(fov/2) instead of dividing;
    it is kept selectable for comparison, but the framing guarantee (and the
    look-at/coverage identities) hold only for GEOMETRIC.
    """

    GEOMETRIC = "geometric"
    TAN_SCALED = "tan_scaled"


@dataclass
class CameraConfig:
    theta_h_deg: float = 64.0
    theta_v_deg: float = 37.0
    aspect_ratio: float = 1.778
    safety_factor: float = 1.5
    distance_formula: DistanceFormula = DistanceFormula.GEOMETRIC

    def __post_init__(self):
        if not 0.0 < self.theta_h_deg < 180.0 or not 0.0 < self.theta_v_deg < 180.0:
            raise ValueError("fields of view must be in (0, 180) deg")
        if self.aspect_ratio <= 0.0:
            raise ValueError("aspect_ratio must be positive")
        if self.safety_factor < 1.0:
            raise ValueError("safety_factor must be >= 1")
        if isinstance(self.distance_formula, str):
            self.distance_formula = DistanceFormula(self.distance_formula)


@dataclass(frozen=True)
class DronePose:
    position: tuple[float, float, float]
    pan_deg: float
    tilt_deg: float
    standoff_m: float


def orientation(defect: DefectEstimate) -> tuple[float, float]:
    """(pan, tilt) in degrees.

    Defects on horizontal surfaces (|tilt about x| >= 80 deg) pin the camera
    tilt to +/-90 and fold the in-plane rotation into pan, since the camera
    can frame the long axis by yawing; otherwise pan/tilt follow the surface
    angles directly.
    """
    if abs(defect.theta_x_deg) >= VERTICAL_TILT_DEG:
        sign = 1.0 if defect.theta_x_deg >= 0.0 else -1.0
        return defect.theta_y_deg - sign * defect.theta_z_deg, sign * 90.0
    return defect.theta_y_deg, defect.theta_x_deg


def framing(
    w: float,
    h: float,
    theta_z_deg: float,
    orientation_type: SurfaceOrientation,
    aspect_ratio: float,
) -> tuple[float, float, float]:
    """Frame extents (W, H) and the reference-axis indicator W / (H * AR).

    For defects on horizontal surfaces the in-plane rotation is zeroed (the
    camera yaws to align instead). An indicator >= 1 means the horizontal
    frame axis constrains the shot; H == 0 yields +inf (horizontal wins).
    """
    if w <= 0.0 and h <= 0.0:
        raise DegenerateGeometry("defect has no extent")
    if orientation_type is SurfaceOrientation.VERTICAL:
        theta_z_deg = 0.0
    a = math.radians(theta_z_deg)
    c, s = math.cos(a), math.sin(a)
    width = max(w * c, h * s)
    height = max(w * s, h * c)
    omega = math.inf if height == 0.0 else width / (height * aspect_ratio)
    return width, height, omega


def standoff_distance(
    width: float, height: float, omega: float, camera: CameraConfig
) -> float:
    if omega >= 1.0:
        length, fov_deg = width, camera.theta_h_deg
    else:
        length, fov_deg = height, camera.theta_v_deg
    t = math.tan(math.radians(fov_deg) / 2.0)
    if camera.distance_formula is DistanceFormula.GEOMETRIC:
        d = (length / 2.0) / t * camera.safety_factor
    else:
        d = (length / 2.0) * t * camera.safety_factor
    if d <= 0.0:
        raise DegenerateGeometry(f"non-positive standoff {d}")
    return d


def plan_pose(defect: DefectEstimate, camera: CameraConfig | None = None) -> DronePose:
    """Position the camera at center - R_y(pan) @ R_x(tilt) @ [0, 0, d]."""
    camera = camera if camera is not None else CameraConfig()
    pan, tilt = orientation(defect)
    width, height, omega = framing(
        defect.w, defect.h, defect.theta_z_deg, defect.orientation, camera.aspect_ratio
    )
    d = standoff_distance(width, height, omega, camera)
    offset = rot_y(pan) @ rot_x(tilt) @ np.array([0.0, 0.0, d])
    position = np.asarray(defect.center, dtype=float) - offset
    return DronePose(
        position=(float(position[0]), float(position[1]), float(position[2])),
        pan_deg=pan,
        tilt_deg=tilt,
        standoff_m=d,
    )
