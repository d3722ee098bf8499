"""Black-box model interfaces the pipeline composes over."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from ..core_types import BBox, BinaryMask, ImageRgb8, Point2D
from ..prompt_boost import FeatureMap


@runtime_checkable
class GroundingBackend(Protocol):
    def ground(self, image: ImageRgb8, sentence: str) -> BBox:
        """Locate the described region; raises NoDetection when nothing matches."""
        ...


@runtime_checkable
class SegmentationBackend(Protocol):
    def segment(self, image: ImageRgb8, box: BBox, points: Sequence[Point2D]) -> BinaryMask:
        """Produce a full-frame mask for the prompted region."""
        ...


@runtime_checkable
class FeatureBackend(Protocol):
    def features(self, image: ImageRgb8) -> FeatureMap:
        """Dense per-cell feature grid for the image."""
        ...


@runtime_checkable
class ScoringBackend(Protocol):
    def classify(self, image: ImageRgb8, labels: Sequence[str]) -> list[float]:
        """Zero-shot class probabilities; non-negative, summing to 1."""
        ...

    def match_texts(self, image: ImageRgb8, texts: Sequence[str]) -> list[float]:
        """Image-text similarities in [0, 1]."""
        ...


@dataclass(frozen=True)
class Backends:
    """The four model endpoints the pipeline needs."""

    grounding: GroundingBackend
    segmentation: SegmentationBackend
    features: FeatureBackend
    scoring: ScoringBackend
