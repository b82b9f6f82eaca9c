"""Wire protocol: newline-delimited JSON frames and the per-session adapter.

Inbound frames:
    {"type":"gaze","t_us":int,"origin":[x,y,z],"hit":[x,y,z],"normal":[x,y,z]}
    {"type":"hello","version":1}            optional; mismatched version is
                                            refused with an error frame
    {"type":"config", ...partial config...} live re-tuning (same shape as the
                                            config file sections)

Outbound frames (all carry session_id, a gapless per-session seq, the stream
time t_us, and the server wall clock wall_us):
    {"type":"attention","seq":n,"level":"scanning|focusing|inspecting",
     "fr":f,"mfd_ms":f,"msl_m":f|null,"t_us":t}
    {"type":"fixation","seq":n,"centroid":[x,y,z],"duration_ms":f}
    {"type":"collection","seq":n,"n_fixations":k,"hull_area_m2":f,
     "stopped":bool,"hull_world":[[x,y,z],...]}
    {"type":"pose","seq":n,"defect":{"w":f,"h":f,"theta_z_deg":f,"area_m2":f,
     "kind":"crack|area","orientation":"horizontal|vertical","center":[x,y,z]},
     "position":[x,y,z],"pan_deg":f,"tilt_deg":f,"standoff_m":f}
    {"type":"error","code":s,"detail":s}

msl_m is null while fewer than two fixations are in the window (the metric
is +inf there, which JSON cannot carry).
"""

from __future__ import annotations

import json
import math
import time
import uuid

from .attention import AttentionTransition
from .config import PipelineConfig
from .defect import CollectionProgress
from .pipeline import DefectResult, InspectionPipeline
from .segmentation import FixationEvent, GazeSample, NonMonotonicTimestamp

PROTOCOL_VERSION = 1

INBOUND_TYPES = frozenset({"gaze", "hello", "config"})


class WireError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


def _vec3(value, name: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise WireError("bad_field", f"{name} must be a 3-element array")
    try:
        x, y, z = (float(value[0]), float(value[1]), float(value[2]))
    except (TypeError, ValueError):
        raise WireError("bad_field", f"{name} must hold numbers") from None
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
        raise WireError("bad_field", f"{name} must be finite")
    return (x, y, z)


def parse_gaze(msg: dict) -> GazeSample:
    t = msg.get("t_us")
    if not isinstance(t, int) or isinstance(t, bool):
        raise WireError("bad_field", "t_us must be an integer")
    try:
        return GazeSample(
            t_us=t,
            origin=_vec3(msg.get("origin"), "origin"),
            hit=_vec3(msg.get("hit"), "hit"),
            normal=_vec3(msg.get("normal"), "normal"),
        )
    except ValueError as exc:  # unit-normal / hit==origin invariants
        raise WireError("bad_sample", str(exc)) from None


def gaze_frame(t_us: int, origin, hit, normal) -> dict:
    return {
        "type": "gaze",
        "t_us": int(t_us),
        "origin": [float(x) for x in origin],
        "hit": [float(x) for x in hit],
        "normal": [float(x) for x in normal],
    }


def sample_to_frame(sample: GazeSample) -> dict:
    return gaze_frame(sample.t_us, sample.origin, sample.hit, sample.normal)


def dump_frame(frame: dict) -> str:
    return json.dumps(frame, separators=(",", ":")) + "\n"


class SessionPipeline:
    """One network session: JSON lines in, JSON frames out.

    Wraps an InspectionPipeline with sequence numbering, validation, and
    error reporting. Malformed input produces an error frame and leaves the
    session (and the gaze stream state) untouched.
    """

    def __init__(
        self,
        session_id: str | None = None,
        config: PipelineConfig | None = None,
    ):
        self.session_id = session_id if session_id is not None else str(uuid.uuid4())
        self.config = config if config is not None else PipelineConfig()
        self.pipeline = InspectionPipeline(self.config)
        self.seq = 0

    # -- frame assembly ----------------------------------------------------

    def _emit(self, frame_type: str, body: dict) -> dict:
        self.seq += 1
        frame = {"type": frame_type, "seq": self.seq, "session_id": self.session_id}
        frame.update(body)
        frame["wall_us"] = time.time_ns() // 1000
        return frame

    def _error(self, code: str, detail: str) -> dict:
        return self._emit("error", {"code": code, "detail": detail})

    def _frames_for(self, outputs) -> list[dict]:
        frames: list[dict] = []
        for out in outputs:
            if isinstance(out, FixationEvent):
                frames.append(
                    self._emit(
                        "fixation",
                        {
                            "centroid": list(out.centroid),
                            "duration_ms": out.duration_ms,
                            "t_us": out.end_t_us,
                        },
                    )
                )
            elif isinstance(out, AttentionTransition):
                m = out.metrics
                frames.append(
                    self._emit(
                        "attention",
                        {
                            "level": out.to_level.value,
                            "fr": m.fr,
                            "mfd_ms": m.mfd_ms,
                            "msl_m": None if math.isinf(m.msl_m) else m.msl_m,
                            "t_us": out.t_us,
                        },
                    )
                )
            elif isinstance(out, CollectionProgress):
                frames.append(
                    self._emit(
                        "collection",
                        {
                            "n_fixations": out.n_fixations,
                            "hull_area_m2": out.hull_area_m2,
                            "stopped": out.stopped,
                            "hull_world": [list(p) for p in out.hull_world],
                            "t_us": out.t_us,
                        },
                    )
                )
            elif isinstance(out, DefectResult):
                est, pose = out.estimate, out.pose
                frames.append(
                    self._emit(
                        "pose",
                        {
                            "defect": {
                                "w": est.w,
                                "h": est.h,
                                "theta_z_deg": est.theta_z_deg,
                                "area_m2": est.area_m2,
                                "kind": est.kind.value,
                                "orientation": est.orientation.value,
                                "center": list(est.center),
                            },
                            "position": list(pose.position),
                            "pan_deg": pose.pan_deg,
                            "tilt_deg": pose.tilt_deg,
                            "standoff_m": pose.standoff_m,
                            "t_us": out.t_us,
                        },
                    )
                )
        return frames

    # -- inbound handling ----------------------------------------------------

    def handle_line(self, line: str) -> tuple[list[dict], bool]:
        """Process one inbound line; returns (frames, close_connection)."""
        line = line.strip()
        if not line:
            return [], False
        try:
            msg = json.loads(line)
        except json.JSONDecodeError as exc:
            return [self._error("bad_message", f"invalid JSON: {exc.msg}")], False
        if not isinstance(msg, dict) or "type" not in msg:
            return [self._error("bad_message", "frame must be an object with a type")], False

        kind = msg["type"]
        if kind == "gaze":
            return self._handle_gaze(msg), False
        if kind == "hello":
            version = msg.get("version")
            if version != PROTOCOL_VERSION:
                return (
                    [
                        self._error(
                            "version_mismatch",
                            f"server speaks version {PROTOCOL_VERSION}, client sent {version!r}",
                        )
                    ],
                    True,
                )
            return [], False
        if kind == "config":
            patch = {k: v for k, v in msg.items() if k != "type"}
            try:
                self.config.apply_patch(patch)
            except (ValueError, KeyError) as exc:
                return [self._error("bad_config", str(exc))], False
            return [], False
        return [self._error("bad_message", f"unknown frame type {kind!r}")], False

    def _handle_gaze(self, msg: dict) -> list[dict]:
        try:
            sample = parse_gaze(msg)
        except WireError as exc:
            return [self._error(exc.code, exc.detail)]
        try:
            outputs = self.pipeline.process(sample)
        except NonMonotonicTimestamp as exc:
            return [self._error("non_monotonic_t", str(exc))]
        return self._frames_for(outputs)

    def handle_close(self) -> list[dict]:
        """Flush the pending sample group at end of session."""
        return self._frames_for(self.pipeline.flush())
