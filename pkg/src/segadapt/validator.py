"""Label-free quality score for a candidate mask.

The score sums a zero-shot classification probability for the target class
(computed on the image with everything outside the mask blacked out) and
the mean image-text matching similarity over the task descriptors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .backends.interfaces import ScoringBackend
from .core_types import BinaryMask, ImageRgb8, TaskDefinition
from .errors import DimensionMismatch


@dataclass(frozen=True)
class ValidationScore:
    s_zc: float
    s_mt: float
    s_val: float

    def __post_init__(self) -> None:
        if abs(self.s_val - (self.s_zc + self.s_mt)) > 1e-9:
            raise ValueError("s_val must equal s_zc + s_mt")

    @classmethod
    def floor(cls) -> "ValidationScore":
        return cls(0.0, 0.0, 0.0)


def masked_image(image: ImageRgb8, mask: BinaryMask) -> ImageRgb8:
    """Keep pixels under the mask; everything else becomes black."""
    if (image.height, image.width) != (mask.height, mask.width):
        raise DimensionMismatch(
            f"image {image.width}x{image.height} vs mask {mask.width}x{mask.height}"
        )
    return ImageRgb8(image.array * mask.array[:, :, None])


def zero_shot_score(
    image: ImageRgb8, mask: BinaryMask, task: TaskDefinition, scorer: ScoringBackend
) -> float:
    """Probability assigned to the target among target + contrastive classes."""
    labels = [task.target, *task.contrastive_classes]
    probs = scorer.classify(masked_image(image, mask), labels)
    return float(probs[0])


def match_score(
    image: ImageRgb8, mask: BinaryMask, task: TaskDefinition, scorer: ScoringBackend
) -> float:
    """Mean similarity between the masked image and the task descriptors."""
    sims = scorer.match_texts(masked_image(image, mask), list(task.descriptors))
    return float(np.mean(sims))


def validate(
    image: ImageRgb8, mask: BinaryMask, task: TaskDefinition, scorer: ScoringBackend
) -> ValidationScore:
    s_zc = zero_shot_score(image, mask, task, scorer)
    s_mt = match_score(image, mask, task, scorer)
    return ValidationScore(s_zc=s_zc, s_mt=s_mt, s_val=s_zc + s_mt)
