"""End-to-end per-session pipeline: samples in, typed analysis outputs out.

Wiring: the segmenter turns samples into fixation/saccade events; every
completed event advances the attention tracker; transitions into and out of
the inspecting level start/abort the fixation collection; when the stop rule
fires, the collected fixations become a defect estimate plus a camera pose.

Single-threaded per stream; instances are independent and hold no globals.
"""

from __future__ import annotations

from dataclasses import dataclass

from .attention import AttentionTracker, AttentionTransition
from .config import PipelineConfig
from .defect import CollectionController, CollectionProgress, DefectEstimate
from .pose import DronePose, plan_pose
from .segmentation import DispersionSegmenter, FixationEvent, GazeEvent, GazeSample


@dataclass(frozen=True)
class DefectResult:
    """Final output for one inspection dwell."""

    estimate: DefectEstimate
    pose: DronePose
    t_us: int
    collection_started_t_us: int


PipelineOutput = GazeEvent | AttentionTransition | CollectionProgress | DefectResult


class InspectionPipeline:
    def __init__(self, config: PipelineConfig | None = None):
        self.config = config if config is not None else PipelineConfig()
        self.segmenter = DispersionSegmenter(self.config.dispersion)
        self.tracker = AttentionTracker(
            thresholds=self.config.attention.thresholds,
            window_s=self.config.attention.window_s,
            min_dwell_ms=self.config.attention.min_dwell_ms,
        )
        self.collector = CollectionController(self.config.crack_width_m)

    def process(self, sample: GazeSample) -> list[PipelineOutput]:
        """Feed one sample; returns everything it completed, in order."""
        outputs: list[PipelineOutput] = []
        for event in self.segmenter.ingest(sample):
            outputs.extend(self._handle_event(event))
        return outputs

    def flush(self) -> list[PipelineOutput]:
        """Finalize the pending sample group at end of stream."""
        outputs: list[PipelineOutput] = []
        for event in self.segmenter.flush():
            outputs.extend(self._handle_event(event))
        return outputs

    def _handle_event(self, event: GazeEvent) -> list[PipelineOutput]:
        outputs: list[PipelineOutput] = [event]
        transition = self.tracker.step(event)
        if transition is not None:
            outputs.append(transition)
            self.collector.on_transition(transition)
        if isinstance(event, FixationEvent):
            started = self.collector.started_t_us
            result = self.collector.on_fixation(event)
            if result is not None:
                progress, estimate = result
                outputs.append(progress)
                if estimate is not None:
                    # crack results are valid outputs, not errors
                    pose = plan_pose(estimate, self.config.camera)
                    outputs.append(
                        DefectResult(
                            estimate=estimate,
                            pose=pose,
                            t_us=event.end_t_us,
                            collection_started_t_us=int(started or event.end_t_us),
                        )
                    )
        return outputs
