"""Classifier contracts plus a deterministic synthetic implementation.

The synthetic classifier turns frame ground-truth annotations into ranked
scores, attenuated by resolution so lower resolutions score lower. Optional
distractor classes carry fixed scores that do not attenuate, which lets
query objects fall out of the top-k as resolution shrinks.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .core import Annotation, ClassScore, Detection, Frame, Resolution


@dataclass(frozen=True)
class AttenuationParams:
    gamma: float = 0.15
    floor: float = 0.5
    reference_resolution: Resolution = Resolution(1920, 1080)

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError("floor must be in [0, 1]")


def attenuation(res: Resolution, params: AttenuationParams) -> float:
    """Score multiplier in (0, 1]: 1 at the reference resolution, floored below."""
    ratio = res.pixel_count / params.reference_resolution.pixel_count
    return min(1.0, max(params.floor, ratio**params.gamma))


def rank_scores(raw: Dict[str, float]) -> Tuple[ClassScore, ...]:
    """Assign 1-based ranks by descending score, ties broken by label."""
    ordered = sorted(raw.items(), key=lambda kv: (-kv[1], kv[0]))
    return tuple(
        ClassScore(label=label, score=score, rank=i + 1)
        for i, (label, score) in enumerate(ordered)
    )


class SyntheticClassifier:
    """Lightweight-classifier contract backed by frame annotations."""

    def __init__(
        self,
        params: AttenuationParams = AttenuationParams(),
        distractors: Sequence[Tuple[str, float]] = (),
    ):
        self.params = params
        self.distractors = tuple(distractors)

    def classify(self, frame: Frame, res: Resolution) -> Tuple[ClassScore, ...]:
        """Ranked class scores for the frame as seen at the given resolution."""
        factor = attenuation(res, self.params)
        raw: Dict[str, float] = {}
        for ann in frame.annotations:
            score = ann.base_score * factor
            raw[ann.label] = max(raw.get(ann.label, 0.0), score)
        for label, score in self.distractors:
            if label not in raw:
                raw[label] = score
        return rank_scores(raw)


class SyntheticDetector:
    """Heavy cloud-detector contract: annotations verbatim, attenuated at the
    frame's delivered resolution."""

    def __init__(self, params: AttenuationParams = AttenuationParams()):
        self.params = params

    def detect(self, frame: Frame) -> Tuple[Detection, ...]:
        factor = attenuation(Resolution(frame.width, frame.height), self.params)
        detections: List[Detection] = []
        for ann in frame.annotations:
            detections.append(
                Detection(
                    label=ann.label,
                    score=ann.base_score * factor,
                    bbox=ann.bbox,
                    ts_ms=frame.ts_ms,
                )
            )
        detections.sort(key=lambda d: (-d.score, d.label))
        return tuple(detections)
