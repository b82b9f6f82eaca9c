"""Real-time gaze analytics for visual inspection.

Turns a 60 Hz stream of 3D gaze samples into fixation/saccade events,
classifies the inspector's attention level over a trailing window, measures
defect geometry from the fixations collected while inspecting, and plans a
camera pose for photographing the defect. Includes a simulator with analytic
ground truth and a streaming session service with record/replay.
"""

from .attention import (
    AttentionLevel,
    AttentionMetrics,
    AttentionThresholds,
    AttentionTracker,
    AttentionTransition,
    classify,
    compute_metrics,
)
from .config import AttentionConfig, PipelineConfig
from .defect import (
    CollectionController,
    CollectionProgress,
    DefectEstimate,
    DefectKind,
    FixationCollection,
    SurfaceOrientation,
    average_normal,
    convex_hull,
    estimate_defect,
    euler_from_normal,
    principal_axes,
    project_fixations,
    should_stop,
)
from .geometry import DegenerateGeometry, rot_x, rot_y
from .pipeline import DefectResult, InspectionPipeline
from .pose import (
    CameraConfig,
    DistanceFormula,
    DronePose,
    framing,
    orientation,
    plan_pose,
    standoff_distance,
)
from .segmentation import (
    DispersionConfig,
    DispersionSegmenter,
    FixationEvent,
    GazeEvent,
    GazeSample,
    NonMonotonicTimestamp,
    SaccadeEvent,
    dispersion_diameter,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionConfig",
    "AttentionLevel",
    "AttentionMetrics",
    "AttentionThresholds",
    "AttentionTracker",
    "AttentionTransition",
    "CameraConfig",
    "CollectionController",
    "CollectionProgress",
    "DefectEstimate",
    "DefectKind",
    "DefectResult",
    "DegenerateGeometry",
    "DispersionConfig",
    "DispersionSegmenter",
    "DistanceFormula",
    "DronePose",
    "FixationCollection",
    "FixationEvent",
    "GazeEvent",
    "GazeSample",
    "InspectionPipeline",
    "NonMonotonicTimestamp",
    "PipelineConfig",
    "SaccadeEvent",
    "SurfaceOrientation",
    "average_normal",
    "classify",
    "compute_metrics",
    "convex_hull",
    "dispersion_diameter",
    "estimate_defect",
    "euler_from_normal",
    "framing",
    "orientation",
    "plan_pose",
    "principal_axes",
    "project_fixations",
    "rot_x",
    "rot_y",
    "should_stop",
    "standoff_distance",
]
