"""Deterministic mock backends forming a closed test world.

Together with the synthetic benchmark generator these define a world where
ground truth is known exactly: grounding is brightness thresholding plus
connected components, segmentation is Otsu inside the box, features are
windowed color/gradient statistics, and scoring measures how much of the
masked image falls into per-class gray bands.

The grounding threshold (200) sits far above the synthetic target band
(around 140 on a 120 background), so untransformed images fail grounding
and only contrast-raising configurations succeed; this is what gives the
adaptation loop a real signal to find.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy import ndimage

from ..core_types import BBox, BinaryMask, ImageRgb8, Point2D
from ..errors import NoDetection
from ..image_ops import luminance
from ..prompt_boost import FeatureMap
from .interfaces import Backends

EIGHT_CONNECTED = np.ones((3, 3), dtype=np.int64)

DEFAULT_TARGET_BAND = (125, 155)
DEFAULT_CLASS_BANDS: dict[str, tuple[int, int]] = {
    "lesion": (125, 155),
    "bright nodule": (156, 255),
    "dark spot": (0, 95),
    "background": (96, 124),
}


@dataclass(frozen=True)
class MockWorldSpec:
    """Constants of the closed mock world."""

    threshold: int = 200
    target_band: tuple[int, int] = DEFAULT_TARGET_BAND
    class_bands: Mapping[str, tuple[int, int]] = field(
        default_factory=lambda: dict(DEFAULT_CLASS_BANDS)
    )
    feature_window: int = 8

    def __post_init__(self) -> None:
        bands = [self.target_band, *self.class_bands.values()]
        for lo, hi in bands:
            if not (0 <= lo <= hi <= 255):
                raise ValueError(f"band ({lo}, {hi}) outside [0, 255]")
        if self.feature_window < 1:
            raise ValueError("feature_window must be >= 1")


def _gray(image: ImageRgb8) -> np.ndarray:
    return np.rint(luminance(image.array)).clip(0, 255).astype(np.int64)


def _largest_component(labels: np.ndarray, n_labels: int) -> np.ndarray:
    sizes = np.bincount(labels.ravel(), minlength=n_labels + 1)
    sizes[0] = 0
    return labels == int(np.argmax(sizes))


class MockGroundingBackend:
    """Tight box of the largest 8-connected region at or above the threshold."""

    def __init__(self, spec: MockWorldSpec):
        self.spec = spec

    def ground(self, image: ImageRgb8, sentence: str) -> BBox:
        if not sentence:
            raise ValueError("sentence must be non-empty")
        fg = _gray(image) >= self.spec.threshold
        labels, n_labels = ndimage.label(fg, structure=EIGHT_CONNECTED)
        if n_labels == 0:
            raise NoDetection(f"no region at or above threshold {self.spec.threshold}")
        region = _largest_component(labels, n_labels)
        ys, xs = np.nonzero(region)
        return BBox(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)


def _otsu_threshold(values: np.ndarray) -> int:
    """Gray level maximizing between-class variance; lowest level on ties."""
    hist = np.bincount(values.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    omega = np.cumsum(hist) / total
    mu = np.cumsum(hist * np.arange(256)) / total
    mu_total = mu[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma_b = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    sigma_b[~np.isfinite(sigma_b)] = 0.0
    return int(np.argmax(sigma_b))


class MockSegmentationBackend:
    """Otsu thresholding inside the box, keeping the prompted component.

    The mask is the largest above-threshold component containing the box
    center or any prompt point; if none qualifies, the largest component
    overall. Zero-variance box interiors fill the whole box.
    """

    def __init__(self, spec: MockWorldSpec):
        self.spec = spec

    def segment(
        self, image: ImageRgb8, box: BBox, points: Sequence[Point2D]
    ) -> BinaryMask:
        box.validate_within(image.width, image.height)
        gray = _gray(image)
        interior = gray[box.y_min : box.y_max, box.x_min : box.x_max]
        mask = np.zeros((image.height, image.width), dtype=np.uint8)
        if interior.min() == interior.max():
            mask[box.y_min : box.y_max, box.x_min : box.x_max] = 1
            return BinaryMask(mask)
        level = _otsu_threshold(interior)
        fg = interior > level
        labels, n_labels = ndimage.label(fg, structure=EIGHT_CONNECTED)
        if n_labels == 0:
            return BinaryMask(mask)

        anchors = [((box.y_min + box.y_max) // 2, (box.x_min + box.x_max) // 2)]
        for p in points:
            anchors.append((int(p.y), int(p.x)))
        hits = set()
        for y, x in anchors:
            iy, ix = y - box.y_min, x - box.x_min
            if 0 <= iy < fg.shape[0] and 0 <= ix < fg.shape[1] and labels[iy, ix] > 0:
                hits.add(int(labels[iy, ix]))
        sizes = np.bincount(labels.ravel(), minlength=n_labels + 1)
        if hits:
            chosen = max(hits, key=lambda lab: (sizes[lab], -lab))
        else:
            sizes[0] = 0
            chosen = int(np.argmax(sizes))
        mask[box.y_min : box.y_max, box.x_min : box.x_max] = (labels == chosen).astype(np.uint8)
        return BinaryMask(mask)


class MockFeatureBackend:
    """Windowed 6-dim descriptor: mean RGB, mean |dx|, mean |dy|, gray std."""

    def __init__(self, spec: MockWorldSpec):
        self.spec = spec

    def features(self, image: ImageRgb8) -> FeatureMap:
        w = self.spec.feature_window
        rows = math.ceil(image.height / w)
        cols = math.ceil(image.width / w)
        arr = image.array.astype(np.float64)
        gray = luminance(arr)
        out = np.zeros((rows, cols, 6), dtype=np.float64)
        for i in range(rows):
            for j in range(cols):
                block = arr[i * w : (i + 1) * w, j * w : (j + 1) * w]
                gblock = gray[i * w : (i + 1) * w, j * w : (j + 1) * w]
                out[i, j, 0:3] = block.reshape(-1, 3).mean(axis=0)
                if gblock.shape[1] > 1:
                    out[i, j, 3] = np.abs(np.diff(gblock, axis=1)).mean()
                if gblock.shape[0] > 1:
                    out[i, j, 4] = np.abs(np.diff(gblock, axis=0)).mean()
                out[i, j, 5] = gblock.std()
        return FeatureMap(out, image_width=image.width, image_height=image.height)


class MockScoringBackend:
    """Gray-band fractions over the non-black pixels, softmaxed for classify."""

    def __init__(self, spec: MockWorldSpec):
        self.spec = spec

    def _band_fraction(self, image: ImageRgb8, band: tuple[int, int] | None) -> float:
        if band is None:
            return 0.0
        nonblack = (image.array != 0).any(axis=2)
        n = int(nonblack.sum())
        if n == 0:
            return 0.0
        gray = _gray(image)
        lo, hi = band
        return float(((gray >= lo) & (gray <= hi) & nonblack).sum()) / n

    def classify(self, image: ImageRgb8, labels: Sequence[str]) -> list[float]:
        if not labels:
            raise ValueError("labels must be non-empty")
        raw = np.array(
            [self._band_fraction(image, self.spec.class_bands.get(lab)) for lab in labels]
        )
        exp = np.exp(raw - raw.max())
        probs = exp / exp.sum()
        return [float(p) for p in probs]

    def match_texts(self, image: ImageRgb8, texts: Sequence[str]) -> list[float]:
        if not texts:
            raise ValueError("texts must be non-empty")
        score = self._band_fraction(image, self.spec.target_band)
        return [score for _ in texts]


def mock_backends(spec: MockWorldSpec | None = None) -> Backends:
    spec = spec or MockWorldSpec()
    return Backends(
        grounding=MockGroundingBackend(spec),
        segmentation=MockSegmentationBackend(spec),
        features=MockFeatureBackend(spec),
        scoring=MockScoringBackend(spec),
    )
