"""Shared rotation/vector helpers (right-handed axes, world frame is Y-down)."""

from __future__ import annotations

import math

import numpy as np

Vec3 = tuple[float, float, float]


class DegenerateGeometry(ValueError):
    """Raised when a geometric operation has no meaningful answer
    (identical points, zero extents, zero-length vectors)."""


def rot_x(angle_deg: float) -> np.ndarray:
    """Right-handed rotation matrix about the x-axis."""
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle_deg: float) -> np.ndarray:
    """Right-handed rotation matrix about the y-axis."""
    a = math.radians(angle_deg)
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def normalize(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise DegenerateGeometry("cannot normalize a zero vector")
    return v / n


def is_unit(v, tol: float = 1e-6) -> bool:
    return abs(float(np.linalg.norm(np.asarray(v, dtype=float))) - 1.0) <= tol
