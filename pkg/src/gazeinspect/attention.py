"""Windowed eye-movement metrics and the three-level attention classifier.

Three metrics are computed over a trailing reference window (default 5 s):

* fixation rate — fraction of the window covered by fixations (durations
  clipped to the window, so the rate never exceeds 1),
* mean fixation duration — mean of the full, unclipped durations of the
  fixations intersecting the window,
* mean saccade length — mean 3D distance between consecutive fixation
  centroids in the window; +inf when fewer than two fixations intersect,
  which fails every "<=" threshold and keeps the level at scanning.

Levels: scanning is the default; focusing requires a high-enough fixation
rate and short saccades; inspecting additionally requires long fixations.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

from .segmentation import FixationEvent, GazeEvent


class AttentionLevel(str, Enum):
    SCANNING = "scanning"
    FOCUSING = "focusing"
    INSPECTING = "inspecting"


@dataclass(frozen=True)
class AttentionMetrics:
    fr: float
    mfd_ms: float
    msl_m: float
    window_s: float


@dataclass
class AttentionThresholds:
    focusing_fr: float = 0.50
    focusing_msl_m: float = 0.5
    inspecting_fr: float = 0.90
    inspecting_msl_m: float = 0.15
    inspecting_mfd_ms: float = 300.0

    def __post_init__(self):
        if self.inspecting_fr < self.focusing_fr:
            raise ValueError("inspecting_fr must be >= focusing_fr")
        if self.inspecting_msl_m > self.focusing_msl_m:
            raise ValueError("inspecting_msl_m must be <= focusing_msl_m")


@dataclass(frozen=True)
class AttentionTransition:
    from_level: AttentionLevel
    to_level: AttentionLevel
    t_us: int
    metrics: AttentionMetrics


def compute_metrics(
    events: list[GazeEvent], now_us: int, window_s: float
) -> AttentionMetrics:
    """Metrics over events intersecting [now - window, now].

    `events` must be ordered by start time; saccade events are ignored
    (they carry no centroid and contribute nothing to any metric).
    """
    if window_s <= 0.0:
        raise ValueError(f"window must be positive, got {window_s}")
    window_us = window_s * 1e6
    lo = now_us - window_us

    fixations = [
        e
        for e in events
        if isinstance(e, FixationEvent) and e.end_t_us >= lo and e.start_t_us <= now_us
    ]
    if not fixations:
        return AttentionMetrics(fr=0.0, mfd_ms=0.0, msl_m=math.inf, window_s=window_s)

    covered_us = 0.0
    for f in fixations:
        covered_us += max(0.0, min(f.end_t_us, now_us) - max(f.start_t_us, lo))
    fr = covered_us / window_us

    mfd_ms = sum(f.end_t_us - f.start_t_us for f in fixations) / len(fixations) / 1000.0

    if len(fixations) < 2:
        msl_m = math.inf
    else:
        msl_m = sum(
            math.dist(a.centroid, b.centroid)
            for a, b in zip(fixations, fixations[1:])
        ) / (len(fixations) - 1)

    return AttentionMetrics(fr=fr, mfd_ms=mfd_ms, msl_m=msl_m, window_s=window_s)


def classify(
    metrics: AttentionMetrics, thresholds: AttentionThresholds
) -> AttentionLevel:
    """Pure function of (metrics, thresholds); scanning is the fallback."""
    if (
        metrics.fr >= thresholds.inspecting_fr
        and metrics.msl_m <= thresholds.inspecting_msl_m
        and metrics.mfd_ms >= thresholds.inspecting_mfd_ms
    ):
        return AttentionLevel.INSPECTING
    if metrics.fr >= thresholds.focusing_fr and metrics.msl_m <= thresholds.focusing_msl_m:
        return AttentionLevel.FOCUSING
    return AttentionLevel.SCANNING


class AttentionTracker:
    """Recomputes metrics on each completed gaze event and reports level changes.

    `min_dwell_ms` (default 0 = off) suppresses a change until the current
    level has been held at least that long, for users who want hysteresis.
    """

    def __init__(
        self,
        thresholds: AttentionThresholds | None = None,
        window_s: float = 5.0,
        min_dwell_ms: float = 0.0,
    ):
        if window_s <= 0.0:
            raise ValueError("window_s must be positive")
        self.thresholds = thresholds if thresholds is not None else AttentionThresholds()
        self.window_s = window_s
        self.min_dwell_ms = min_dwell_ms
        self.level = AttentionLevel.SCANNING
        self.metrics = AttentionMetrics(0.0, 0.0, math.inf, window_s)
        self._fixations: deque[FixationEvent] = deque()
        self._level_since_us: int | None = None

    def step(self, event: GazeEvent) -> AttentionTransition | None:
        """Advance to the event's end time; returns a transition on level change."""
        now = event.end_t_us
        if isinstance(event, FixationEvent):
            self._fixations.append(event)
        lo = now - self.window_s * 1e6
        while self._fixations and self._fixations[0].end_t_us < lo:
            self._fixations.popleft()

        self.metrics = compute_metrics(list(self._fixations), now, self.window_s)
        new_level = classify(self.metrics, self.thresholds)
        if new_level == self.level:
            return None
        if (
            self.min_dwell_ms > 0.0
            and self._level_since_us is not None
            and (now - self._level_since_us) / 1000.0 < self.min_dwell_ms
        ):
            return None
        transition = AttentionTransition(self.level, new_level, now, self.metrics)
        self.level = new_level
        self._level_since_us = now
        return transition
