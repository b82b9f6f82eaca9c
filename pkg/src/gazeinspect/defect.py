"""Defect geometry from collected fixations.

Given the fixations gathered while an inspector scrutinizes a defect, this
module recovers the surface orientation (as a pair of rotation angles about
the x- and y-axes), flattens the fixation centroids into the surface plane,
takes their convex hull, and measures the hull's principal extents. The hull
area, appended after every new fixation, also drives the stopping rule that
decides when enough data has been collected.

Conventions: right-handed rotation matrices, Y-down world frame. For a unit
surface normal v the angles satisfy  R_y(ty) @ R_x(tx) @ [0,0,1] == -v, so
flattening applies the inverse product R_x(-tx) @ R_y(-ty) and drops z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .attention import AttentionLevel, AttentionTransition
from .geometry import DegenerateGeometry, rot_x, rot_y
from .segmentation import FixationEvent

VERTICAL_TILT_DEG = 80.0  # |tilt about x| at or above this => horizontal surface
DEFAULT_CRACK_WIDTH_M = 0.05

_SINGULAR_V2 = 1.0 - 1e-9


class DefectKind(str, Enum):
    CRACK = "crack"
    AREA = "area"


class SurfaceOrientation(str, Enum):
    HORIZONTAL = "horizontal"  # defect on a vertical surface (wall)
    VERTICAL = "vertical"      # defect on a horizontal surface (ceiling/floor)


@dataclass(frozen=True)
class DefectEstimate:
    center: tuple[float, float, float]
    avg_normal: tuple[float, float, float]
    theta_x_deg: float
    theta_y_deg: float
    w: float
    h: float
    theta_z_deg: float
    area_m2: float
    kind: DefectKind
    orientation: SurfaceOrientation
    normal_fallback: bool = False  # True when averaged normals cancelled out


def average_normal(fixations: Sequence[FixationEvent]) -> np.ndarray:
    """Normalized arithmetic mean of the fixations' mean normals.

    A near-zero mean (antipodal normals) falls back to the last fixation's
    normal; `estimate_defect` flags that case on its result.
    """
    v, _ = _average_normal(fixations)
    return v


def _average_normal(fixations: Sequence[FixationEvent]) -> tuple[np.ndarray, bool]:
    if not fixations:
        raise DegenerateGeometry("need at least one fixation")
    total = np.sum([f.mean_normal for f in fixations], axis=0)
    mag = float(np.linalg.norm(total))
    if mag < 1e-9:
        return np.asarray(fixations[-1].mean_normal, dtype=float), True
    return total / mag, False


def euler_from_normal(v) -> tuple[float, float]:
    """Angles (about x, about y) in degrees placing -v along the rotated z-axis.

    tx = atan2(v2, sqrt(1 - v2^2));  ty = atan2(-v1/c, -v3/c) with c = cos(tx).
    When |v2| reaches 1 the y-angle is undefined and is pinned to 0.
    """
    v = np.asarray(v, dtype=float)
    n = float(np.linalg.norm(v))
    if abs(n - 1.0) > 1e-6:
        raise ValueError(f"normal must be unit length, |v|={n:.8f}")
    v1, v2, v3 = (float(v[0]), float(v[1]), float(v[2]))
    c = math.sqrt(max(0.0, 1.0 - v2 * v2))
    theta_x = math.degrees(math.atan2(v2, c))
    if abs(v2) >= _SINGULAR_V2:
        return theta_x, 0.0
    # +0.0 flushes negative zero so atan2(0, -1) lands on +180, not -180
    theta_y = math.degrees(math.atan2(-v1 / c + 0.0, -v3 / c + 0.0))
    return theta_x, theta_y


def project_fixations(points, theta_x_deg: float, theta_y_deg: float) -> np.ndarray:
    """Rotate 3D points by R_x(-tx) @ R_y(-ty) and drop the depth component.

    For points coplanar with the normal that produced the angles, pairwise 2D
    distances equal the 3D ones (the dropped depth is constant).
    """
    return _project_full(points, theta_x_deg, theta_y_deg)[:, :2]


def _project_full(points, theta_x_deg: float, theta_y_deg: float) -> np.ndarray:
    rot = rot_x(-theta_x_deg) @ rot_y(-theta_y_deg)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return pts @ rot.T


def _unproject(point_flat, theta_x_deg: float, theta_y_deg: float) -> np.ndarray:
    return rot_y(theta_y_deg) @ rot_x(theta_x_deg) @ np.asarray(point_flat, dtype=float)


def convex_hull(points) -> tuple[np.ndarray, float]:
    """Convex hull by monotone chain; returns (CCW vertices, shoelace area).

    Vertices start at the lexicographically smallest point. Degenerate inputs
    (single point, two points, collinear sets) return the reduced vertex list
    with area 0. Exact duplicate points are collapsed first.
    """
    pts = sorted({(float(p[0]), float(p[1])) for p in np.atleast_2d(points)})
    if not pts:
        raise DegenerateGeometry("need at least one point")
    if len(pts) == 1:
        return np.array(pts), 0.0

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    vertices = lower[:-1] + upper[:-1]
    return np.array(vertices), shoelace_area(vertices)


def shoelace_area(vertices) -> float:
    verts = np.atleast_2d(np.asarray(vertices, dtype=float))
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))) / 2.0


def should_stop(hull_area_history: Sequence[float]) -> bool:
    """Stop once the newest hull area exceeds the mean of the previous five
    by no more than 1% of itself. Needs six entries; a flat (or all-zero)
    history stops at exactly six."""
    if len(hull_area_history) < 6:
        return False
    current = hull_area_history[-1]
    prev_mean = sum(hull_area_history[-6:-1]) / 5.0
    return current - prev_mean <= current / 100.0


def principal_axes(points) -> tuple[float, float, float]:
    """Principal extents (w >= h) of a 2D point set and the acute angle, in
    [0, 90] degrees, between the longer axis and the +x direction.

    Extents are full widths: max - min of the projections onto the two
    covariance eigenvectors, with the axes swapped if needed so that w is
    measured along the axis of larger extent.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] < 2:
        raise DegenerateGeometry("need at least two points")
    centered = pts - pts.mean(axis=0)
    if not centered.any():
        raise DegenerateGeometry("all points identical")
    cov = centered.T @ centered / len(centered)
    _, eigvecs = np.linalg.eigh(cov)  # columns ascending by eigenvalue
    major, minor = eigvecs[:, 1], eigvecs[:, 0]
    ext_major = float(np.ptp(centered @ major))
    ext_minor = float(np.ptp(centered @ minor))
    if ext_minor > ext_major:
        major, minor = minor, major
        ext_major, ext_minor = ext_minor, ext_major
    angle = math.degrees(math.atan2(major[1], major[0])) % 180.0
    if angle > 90.0:
        angle = 180.0 - angle
    return ext_major, ext_minor, angle


def hull_principal_axes(hull_vertices) -> tuple[float, float, float]:
    """Principal extents and long-axis angle of a convex polygon's boundary.

    Like `principal_axes`, but the covariance is integrated uniformly along
    the closed polygon outline rather than summed over discrete points, so
    the axes depend only on the hull's shape: how densely each edge was
    sampled, or any points inside the hull, cannot tilt them. Extents are
    still the full caliper widths of the vertices along the two axes.
    """
    verts = np.atleast_2d(np.asarray(hull_vertices, dtype=float))
    if verts.shape[0] < 2:
        raise DegenerateGeometry("need at least two vertices")
    if verts.shape[0] == 2:
        return principal_axes(verts)
    a = verts
    b = np.roll(verts, -1, axis=0)
    lengths = np.linalg.norm(b - a, axis=1)
    total = float(lengths.sum())
    if total == 0.0:
        raise DegenerateGeometry("all vertices identical")
    mean = ((a + b) / 2.0 * lengths[:, None]).sum(axis=0) / total
    ac = a - mean
    bc = b - mean
    # uniform-density second moment of each segment: (aa'+bb')/3 + (ab'+ba')/6
    cov = np.zeros((2, 2))
    for i in range(len(verts)):
        outer_aa = np.outer(ac[i], ac[i])
        outer_bb = np.outer(bc[i], bc[i])
        outer_ab = np.outer(ac[i], bc[i])
        cov += lengths[i] * ((outer_aa + outer_bb) / 3.0 + (outer_ab + outer_ab.T) / 6.0)
    cov /= total
    _, eigvecs = np.linalg.eigh(cov)
    major, minor = eigvecs[:, 1], eigvecs[:, 0]
    centered = verts - verts.mean(axis=0)
    ext_major = float(np.ptp(centered @ major))
    ext_minor = float(np.ptp(centered @ minor))
    if ext_minor > ext_major:
        major, minor = minor, major
        ext_major, ext_minor = ext_minor, ext_major
    angle = math.degrees(math.atan2(major[1], major[0])) % 180.0
    if angle > 90.0:
        angle = 180.0 - angle
    return ext_major, ext_minor, angle


@dataclass
class FixationCollection:
    """Fixations gathered during one inspection dwell, plus the hull-area
    history (one entry per appended fixation) that feeds the stop rule."""

    fixations: list[FixationEvent] = field(default_factory=list)
    hull_area_history: list[float] = field(default_factory=list)

    def append(self, fixation: FixationEvent) -> float:
        """Add a fixation; returns the hull area of everything collected so far."""
        self.fixations.append(fixation)
        area = self._current_hull()[1]
        self.hull_area_history.append(area)
        return area

    def _current_hull(self) -> tuple[np.ndarray, float, np.ndarray]:
        """(2D hull vertices, area, hull vertices mapped back to 3D)."""
        v, _ = _average_normal(self.fixations)
        theta_x, theta_y = euler_from_normal(v)
        flat = _project_full([f.centroid for f in self.fixations], theta_x, theta_y)
        verts, area = convex_hull(flat[:, :2])
        depth = float(flat[:, 2].mean())
        back = np.array(
            [_unproject([p[0], p[1], depth], theta_x, theta_y) for p in verts]
        )
        return verts, area, back

    def hull_world(self) -> np.ndarray:
        return self._current_hull()[2]

    def should_stop(self) -> bool:
        return should_stop(self.hull_area_history)


def estimate_defect(
    collection: FixationCollection | Sequence[FixationEvent],
    crack_width_m: float = DEFAULT_CRACK_WIDTH_M,
) -> DefectEstimate:
    """Full geometry estimate from a finished collection.

    Pipeline: averaged normal -> rotation angles -> flatten centroids ->
    convex hull -> principal axes of the hull outline (`hull_principal_axes`,
    so neither interior fixations nor uneven boundary sampling can tilt the
    axes). The returned center is the mean of the hull vertices lifted back
    to 3D at the mean retained depth. A minor extent under `crack_width_m`
    classifies the defect as a crack; a tilt magnitude of 80 deg or more
    marks it as lying on a horizontal surface.
    """
    fixations = getattr(collection, "fixations", collection)
    if not fixations:
        raise DegenerateGeometry("empty collection")
    v, fallback = _average_normal(fixations)
    theta_x, theta_y = euler_from_normal(v)
    flat = _project_full([f.centroid for f in fixations], theta_x, theta_y)
    pts2 = flat[:, :2]
    verts, area = convex_hull(pts2)
    w, h, theta_z = hull_principal_axes(verts)
    center2 = verts.mean(axis=0)
    center = _unproject(
        [float(center2[0]), float(center2[1]), float(flat[:, 2].mean())],
        theta_x,
        theta_y,
    )
    return DefectEstimate(
        center=(float(center[0]), float(center[1]), float(center[2])),
        avg_normal=(float(v[0]), float(v[1]), float(v[2])),
        theta_x_deg=theta_x,
        theta_y_deg=theta_y,
        w=w,
        h=h,
        theta_z_deg=theta_z,
        area_m2=area,
        kind=DefectKind.CRACK if h < crack_width_m else DefectKind.AREA,
        orientation=(
            SurfaceOrientation.VERTICAL
            if abs(theta_x) >= VERTICAL_TILT_DEG
            else SurfaceOrientation.HORIZONTAL
        ),
        normal_fallback=fallback,
    )


@dataclass(frozen=True)
class CollectionProgress:
    """Snapshot emitted after each fixation appended to an active collection."""

    n_fixations: int
    hull_area_m2: float
    stopped: bool
    t_us: int
    hull_world: tuple[tuple[float, float, float], ...] = ()


class CollectionController:
    """Gathers fixations while the attention level says 'inspecting'.

    A transition into inspecting starts a collection (the fixation that
    completed that transition is the first member). A transition back to
    scanning aborts and discards it; transient focusing is ridden out. After
    the stop rule fires, the controller stays idle until the next transition
    into inspecting, so one dwell produces exactly one estimate.
    """

    def __init__(self, crack_width_m: float = DEFAULT_CRACK_WIDTH_M):
        self.crack_width_m = crack_width_m
        self.collection: FixationCollection | None = None
        self.started_t_us: int | None = None

    @property
    def active(self) -> bool:
        return self.collection is not None

    def on_transition(self, transition: AttentionTransition) -> bool:
        """Update state; returns True when an in-progress collection is aborted."""
        if transition.to_level is AttentionLevel.INSPECTING and self.collection is None:
            self.collection = FixationCollection()
            self.started_t_us = transition.t_us
            return False
        if transition.to_level is AttentionLevel.SCANNING and self.collection is not None:
            self.collection = None
            self.started_t_us = None
            return True
        return False

    def on_fixation(
        self, fixation: FixationEvent
    ) -> tuple[CollectionProgress, DefectEstimate | None] | None:
        """Append to the active collection; returns (progress, estimate) with
        estimate set once the stop rule fires, or None when not collecting."""
        if self.collection is None:
            return None
        area = self.collection.append(fixation)
        stopped = self.collection.should_stop()
        progress = CollectionProgress(
            n_fixations=len(self.collection.fixations),
            hull_area_m2=area,
            stopped=stopped,
            t_us=fixation.end_t_us,
            hull_world=tuple(map(tuple, self.collection.hull_world())),
        )
        estimate = None
        if stopped:
            estimate = estimate_defect(self.collection, self.crack_width_m)
            self.collection = None
        return progress, estimate
