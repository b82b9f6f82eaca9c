"""Pipeline configuration and its JSON file format.

File layout (all sections optional, unknown keys rejected):

    {
      "dispersion": {"angle_deg": 2.86, "min_samples": 8},
      "attention": {"window_s": 5.0, "min_dwell_ms": 0.0,
                    "focusing_fr": 0.5, "focusing_msl_m": 0.5,
                    "inspecting_fr": 0.9, "inspecting_msl_m": 0.15,
                    "inspecting_mfd_ms": 300.0},
      "camera": {"theta_h_deg": 64.0, "theta_v_deg": 37.0,
                 "aspect_ratio": 1.778, "safety_factor": 1.5,
                 "distance_formula": "geometric"},
      "crack_width_m": 0.05
    }
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from pathlib import Path

from .attention import AttentionThresholds
from .defect import DEFAULT_CRACK_WIDTH_M
from .pose import CameraConfig, DistanceFormula
from .segmentation import DispersionConfig


@dataclass
class AttentionConfig:
    window_s: float = 5.0
    min_dwell_ms: float = 0.0
    thresholds: AttentionThresholds = field(default_factory=AttentionThresholds)


@dataclass
class PipelineConfig:
    dispersion: DispersionConfig = field(default_factory=DispersionConfig)
    attention: AttentionConfig = field(default_factory=AttentionConfig)
    camera: CameraConfig = field(default_factory=CameraConfig)
    crack_width_m: float = DEFAULT_CRACK_WIDTH_M

    def clone(self) -> "PipelineConfig":
        return copy.deepcopy(self)

    def apply_patch(self, patch: dict) -> None:
        """Apply a partial config dict in place (same shape as the file)."""
        _apply(self, patch)

    def to_dict(self) -> dict:
        th = self.attention.thresholds
        return {
            "dispersion": {
                "angle_deg": self.dispersion.dispersion_angle_deg,
                "min_samples": self.dispersion.min_fixation_samples,
            },
            "attention": {
                "window_s": self.attention.window_s,
                "min_dwell_ms": self.attention.min_dwell_ms,
                "focusing_fr": th.focusing_fr,
                "focusing_msl_m": th.focusing_msl_m,
                "inspecting_fr": th.inspecting_fr,
                "inspecting_msl_m": th.inspecting_msl_m,
                "inspecting_mfd_ms": th.inspecting_mfd_ms,
            },
            "camera": {
                "theta_h_deg": self.camera.theta_h_deg,
                "theta_v_deg": self.camera.theta_v_deg,
                "aspect_ratio": self.camera.aspect_ratio,
                "safety_factor": self.camera.safety_factor,
                "distance_formula": self.camera.distance_formula.value,
            },
            "crack_width_m": self.crack_width_m,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        config = cls()
        _apply(config, data)
        return config

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2), encoding="utf-8")


def _apply(config: PipelineConfig, patch: dict) -> None:
    if not isinstance(patch, dict):
        raise ValueError("config patch must be an object")
    for section, value in patch.items():
        if section == "dispersion":
            _apply_fields(
                config.dispersion,
                value,
                {"angle_deg": "dispersion_angle_deg", "min_samples": "min_fixation_samples"},
            )
            config.dispersion.__post_init__()
        elif section == "attention":
            mapping_top = {"window_s": "window_s", "min_dwell_ms": "min_dwell_ms"}
            th_keys = {
                "focusing_fr",
                "focusing_msl_m",
                "inspecting_fr",
                "inspecting_msl_m",
                "inspecting_mfd_ms",
            }
            for key, val in _as_dict(value, section).items():
                if key in mapping_top:
                    setattr(config.attention, key, float(val))
                elif key in th_keys:
                    setattr(config.attention.thresholds, key, float(val))
                else:
                    raise ValueError(f"unknown attention key {key!r}")
            if config.attention.window_s <= 0.0:
                raise ValueError("window_s must be positive")
            config.attention.thresholds.__post_init__()
        elif section == "camera":
            for key, val in _as_dict(value, section).items():
                if key == "distance_formula":
                    config.camera.distance_formula = DistanceFormula(val)
                elif key in {"theta_h_deg", "theta_v_deg", "aspect_ratio", "safety_factor"}:
                    setattr(config.camera, key, float(val))
                else:
                    raise ValueError(f"unknown camera key {key!r}")
            config.camera.__post_init__()
        elif section == "crack_width_m":
            config.crack_width_m = float(value)
            if config.crack_width_m < 0.0:
                raise ValueError("crack_width_m must be >= 0")
        else:
            raise ValueError(f"unknown config section {section!r}")


def _as_dict(value, section: str) -> dict:
    if not isinstance(value, dict):
        raise ValueError(f"config section {section!r} must be an object")
    return value


def _apply_fields(target, value, mapping: dict[str, str]) -> None:
    for key, val in _as_dict(value, type(target).__name__).items():
        if key not in mapping:
            raise ValueError(f"unknown key {key!r}")
        current = getattr(target, mapping[key])
        setattr(target, mapping[key], type(current)(val))
