"""Streaming fixation/saccade segmentation using a 3D dispersion sphere.

Consecutive gaze hits stay in one candidate group while each new hit falls
inside a sphere centered on the running centroid of the group. The sphere's
diameter is the linear size subtended by a fixed visual angle (default
2.86 deg) at the group's mean gaze distance. When a hit lands outside, the
group is finalized: a fixation if it holds enough samples (default 8),
otherwise a saccade, and a new group starts from the breaking sample.

The finalized event's end time is the timestamp of the breaking sample, so
back-to-back events tile the stream without gaps; `flush()` closes the last
group at its final member's timestamp.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]

UNIT_NORMAL_TOL = 1e-6


class NonMonotonicTimestamp(ValueError):
    """A sample's timestamp did not advance the stream; the sample is dropped
    and the segmenter state is left untouched."""


def dispersion_diameter(distance_m: float, angle_deg: float) -> float:
    """Linear diameter of a sphere subtending ``angle_deg`` at ``distance_m``:
    2 * distance * tan(angle / 2)."""
    if not 0.0 < angle_deg < 180.0:
        raise ValueError(f"dispersion angle must be in (0, 180) deg, got {angle_deg}")
    if distance_m < 0.0:
        raise ValueError(f"distance must be >= 0, got {distance_m}")
    return 2.0 * distance_m * math.tan(math.radians(angle_deg) / 2.0)


@dataclass(frozen=True)
class GazeSample:
    """One gaze ray / surface intersection.

    t_us is microseconds, strictly increasing within a stream. `origin` is
    the eye position, `hit` the intersection of the gaze ray with the scene,
    `normal` the unit surface normal at the hit.
    """

    t_us: int
    origin: Vec3
    hit: Vec3
    normal: Vec3

    def __post_init__(self):
        n = self.normal
        mag = math.sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
        if abs(mag - 1.0) > UNIT_NORMAL_TOL:
            raise ValueError(f"normal must be unit length, |n|={mag:.8f}")
        if self.hit == self.origin:
            raise ValueError("hit must differ from origin (gaze distance > 0)")

    @property
    def gaze_distance(self) -> float:
        return math.dist(self.origin, self.hit)


@dataclass(frozen=True)
class FixationEvent:
    centroid: Vec3
    mean_normal: Vec3
    start_t_us: int
    end_t_us: int
    sample_count: int

    @property
    def duration_ms(self) -> float:
        return (self.end_t_us - self.start_t_us) / 1000.0


@dataclass(frozen=True)
class SaccadeEvent:
    start_t_us: int
    end_t_us: int
    sample_count: int

    @property
    def duration_ms(self) -> float:
        return (self.end_t_us - self.start_t_us) / 1000.0


GazeEvent = FixationEvent | SaccadeEvent


@dataclass
class DispersionConfig:
    dispersion_angle_deg: float = 2.86
    min_fixation_samples: int = 8
    sample_rate_hz: float = 60.0  # informational only; grouping is count-based

    def __post_init__(self):
        if not 0.0 < self.dispersion_angle_deg < 180.0:
            raise ValueError("dispersion_angle_deg must be in (0, 180)")
        if self.min_fixation_samples < 2:
            raise ValueError("min_fixation_samples must be >= 2")


class DispersionSegmenter:
    """Online segmenter; one instance per gaze stream, no shared state.

    Keeps only running sums for the current candidate group, so ingest cost
    is O(1) per sample and identical streams produce bit-identical events.
    """

    def __init__(self, config: DispersionConfig | None = None):
        self.config = config if config is not None else DispersionConfig()
        self._last_t: int | None = None
        self._reset_group()

    def _reset_group(self) -> None:
        self._count = 0
        self._sum_hit = [0.0, 0.0, 0.0]
        self._sum_normal = [0.0, 0.0, 0.0]
        self._sum_dist = 0.0
        self._start_t = 0
        self._last_member_t = 0
        self._last_normal: Vec3 = (0.0, 0.0, 1.0)

    def _accept(self, sample: GazeSample) -> None:
        if self._count == 0:
            self._start_t = sample.t_us
        self._count += 1
        h = sample.hit
        self._sum_hit[0] += h[0]
        self._sum_hit[1] += h[1]
        self._sum_hit[2] += h[2]
        n = sample.normal
        self._sum_normal[0] += n[0]
        self._sum_normal[1] += n[1]
        self._sum_normal[2] += n[2]
        self._sum_dist += sample.gaze_distance
        self._last_member_t = sample.t_us
        self._last_normal = sample.normal

    def _finalize(self, end_t_us: int) -> GazeEvent:
        count = self._count
        if count >= self.config.min_fixation_samples:
            cx = self._sum_hit[0] / count
            cy = self._sum_hit[1] / count
            cz = self._sum_hit[2] / count
            nx, ny, nz = self._sum_normal
            mag = math.sqrt(nx * nx + ny * ny + nz * nz)
            if mag < 1e-9:
                # antipodal normals cancel out; fall back to the last member's
                mean_normal = self._last_normal
            else:
                mean_normal = (nx / mag, ny / mag, nz / mag)
            event: GazeEvent = FixationEvent(
                centroid=(cx, cy, cz),
                mean_normal=mean_normal,
                start_t_us=self._start_t,
                end_t_us=end_t_us,
                sample_count=count,
            )
        else:
            event = SaccadeEvent(
                start_t_us=self._start_t,
                end_t_us=end_t_us,
                sample_count=count,
            )
        self._reset_group()
        return event

    def ingest(self, sample: GazeSample) -> list[GazeEvent]:
        """Feed one sample; returns the finalized event, if any (at most one)."""
        if self._last_t is not None and sample.t_us <= self._last_t:
            raise NonMonotonicTimestamp(
                f"timestamp {sample.t_us} does not advance past {self._last_t}"
            )
        self._last_t = sample.t_us

        if self._count == 0:
            self._accept(sample)
            return []

        cx = self._sum_hit[0] / self._count
        cy = self._sum_hit[1] / self._count
        cz = self._sum_hit[2] / self._count
        mean_dist = self._sum_dist / self._count
        radius = dispersion_diameter(mean_dist, self.config.dispersion_angle_deg) / 2.0
        h = sample.hit
        dx, dy, dz = h[0] - cx, h[1] - cy, h[2] - cz
        if math.sqrt(dx * dx + dy * dy + dz * dz) <= radius:
            self._accept(sample)
            return []

        event = self._finalize(end_t_us=sample.t_us)
        self._accept(sample)
        return [event]

    def flush(self) -> list[GazeEvent]:
        """Finalize any pending group (count rule unchanged) and reset."""
        if self._count == 0:
            return []
        return [self._finalize(end_t_us=self._last_member_t)]
