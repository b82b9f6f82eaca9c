"""Replay and reporting over persisted session logs.

Replay re-feeds the recorded inbound frames through a fresh pipeline (same
session id, same config snapshot) either paced against the stream
timestamps or flat out; the regenerated outbound frames equal the recorded
ones once wall-clock fields are stripped.
"""

from __future__ import annotations

import base64
import json
import time
from pathlib import Path

from .attention import AttentionLevel
from .config import PipelineConfig
from .wire import INBOUND_TYPES, SessionPipeline, dump_frame

WALL_CLOCK_FIELDS = ("wall_us", "started_at")


class ReplayError(Exception):
    pass


def strip_volatile(frame: dict) -> dict:
    return {k: v for k, v in frame.items() if k not in WALL_CLOCK_FIELDS}


def read_session(path: str | Path) -> tuple[dict | None, list[dict]]:
    """Parse a session log into (header, frames). Raises ReplayError with the
    offending line number on anything that is not valid JSONL."""
    header = None
    frames: list[dict] = []
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ReplayError(f"{path}: {exc.strerror or exc}")
    with fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                frame = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ReplayError(f"{path}: line {lineno}: invalid JSON ({exc.msg})")
            if not isinstance(frame, dict) or "type" not in frame:
                raise ReplayError(f"{path}: line {lineno}: not a frame object")
            if frame["type"] == "session_start" and header is None:
                header = frame
            else:
                frames.append(frame)
    return header, frames


def _inbound_lines(frames: list[dict]):
    """(line, t_us | None) for every recorded inbound frame, in order."""
    for frame in frames:
        kind = frame.get("type")
        if kind == "raw_in":
            yield base64.b64decode(frame["b64"]).decode("utf-8", "replace"), None
        elif kind in INBOUND_TYPES:
            t = frame.get("t_us") if kind == "gaze" else None
            yield json.dumps(frame, separators=(",", ":")), t


def replay_file(
    path: str | Path,
    speed: float | str = "max",
    config: PipelineConfig | None = None,
    out: str | Path | None = None,
) -> list[dict]:
    """Re-run a recorded session; returns the regenerated outbound frames.

    `speed` is a real-time multiplier, or "max" for no pacing. The session id
    and config snapshot come from the log header unless `config` overrides.
    """
    if isinstance(speed, str):
        if speed != "max":
            raise ValueError(f"speed must be a number or 'max', got {speed!r}")
        multiplier = None
    else:
        multiplier = float(speed)
        if multiplier <= 0.0:
            raise ValueError("speed must be positive")

    header, frames = read_session(path)
    if config is None:
        config = (
            PipelineConfig.from_dict(header["config"])
            if header is not None and "config" in header
            else PipelineConfig()
        )
    session_id = header["session_id"] if header is not None else None
    session = SessionPipeline(session_id=session_id, config=config)

    outputs: list[dict] = []
    t0_us: int | None = None
    wall0 = time.perf_counter()
    for line, t_us in _inbound_lines(frames):
        if multiplier is not None and t_us is not None:
            if t0_us is None:
                t0_us = t_us
                wall0 = time.perf_counter()
            else:
                target = wall0 + (t_us - t0_us) / 1e6 / multiplier
                delay = target - time.perf_counter()
                if delay > 0:
                    time.sleep(delay)
        emitted, _ = session.handle_line(line)
        outputs.extend(emitted)
    outputs.extend(session.handle_close())

    if out is not None:
        with open(out, "w", encoding="utf-8") as fh:
            for frame in outputs:
                fh.write(dump_frame(frame))
    return outputs


def session_report(path: str | Path) -> dict:
    """Summary of a session log: attention-level occupancy ratios, per-defect
    estimates with poses, and collection durations."""
    _, frames = read_session(path)

    gaze_ts = [f["t_us"] for f in frames if f.get("type") == "gaze"]
    attention = [f for f in frames if f.get("type") == "attention"]
    collections = [f for f in frames if f.get("type") == "collection"]
    poses = [f for f in frames if f.get("type") == "pose"]

    report: dict = {
        "frames": len(frames),
        "samples": len(gaze_ts),
        "duration_s": 0.0,
        "occupancy": {level.value: 0.0 for level in AttentionLevel},
        "defects": [],
        "collection_times_s": [],
        "warnings": [],
    }
    if not gaze_ts:
        report["warnings"].append("empty session: no gaze samples")
        return report

    t_first, t_last = gaze_ts[0], gaze_ts[-1]
    span = t_last - t_first
    report["duration_s"] = span / 1e6
    if not attention:
        report["warnings"].append("no attention events in log")

    if span > 0:
        # piecewise-constant level timeline; scanning until the first change
        occupancy = {level.value: 0.0 for level in AttentionLevel}
        level = AttentionLevel.SCANNING.value
        t_prev = t_first
        for frame in attention:
            t = min(max(frame["t_us"], t_first), t_last)
            occupancy[level] += t - t_prev
            level = frame["level"]
            t_prev = t
        occupancy[level] += t_last - t_prev
        report["occupancy"] = {k: v / span for k, v in occupancy.items()}

    start_t: int | None = None
    for frame in collections:
        if frame["n_fixations"] == 1:
            start_t = frame["t_us"]
        if frame["stopped"] and start_t is not None:
            report["collection_times_s"].append((frame["t_us"] - start_t) / 1e6)
            start_t = None

    for frame in poses:
        report["defects"].append(
            {
                "defect": frame["defect"],
                "position": frame["position"],
                "pan_deg": frame["pan_deg"],
                "tilt_deg": frame["tilt_deg"],
                "standoff_m": frame["standoff_m"],
            }
        )
    return report
