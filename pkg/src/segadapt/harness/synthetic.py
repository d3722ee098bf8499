"""Seeded synthetic benchmark: low-contrast ellipse targets on textured noise.

Each 128x128 sample holds one target ellipse drawn just above the
background level plus one or two distractor ellipses in other gray bands.
Target intensities stay far below the mock grounding threshold so the
untransformed pipeline fails, which is the behavior the adaptation loop
must learn to fix. The generator also writes the task descriptor and its
text assets so the CLI can run against the benchmark directly.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..backends.mock import MockWorldSpec
from ..core_types import BinaryMask, ImageRgb8, save_image, save_mask
from .dataset import DatasetManifest, load_manifest

IMAGE_SIZE = 128
BACKGROUND_MEAN, BACKGROUND_STD = 120.0, 8.0
TARGET_MEAN, TARGET_STD = 140.0, 5.0
TARGET_AXES = (12, 30)
DISTRACTOR_AXES = (4, 9)
DISTRACTOR_LEVELS = {"bright nodule": (180.0, 6.0), "dark spot": (75.0, 6.0)}
PLACEMENT_MARGIN = 8

TASK_TARGET = "lesion"
TASK_WHOLE = "synthetic scan"

GROUNDING_SENTENCES = [
    "Find the soft oval patch that sits slightly brighter than the surrounding texture.",
    "Find the rounded region whose gray level is a touch above the speckled field.",
    "Find the single large elliptical blob that stands out faintly from the noise.",
    "Find the smooth pale ellipse distinct from the small very bright or very dark spots.",
    "Find the broad low-contrast oval, not the tiny high-contrast marks.",
    "Find the faintly elevated gray ellipse occupying a few percent of the frame.",
    "Find the mild bright region with gradual edges against the grainy background.",
    "Find the widest gently highlighted oval area in the field.",
    "Find the subtle ellipse whose interior is only slightly lighter than average.",
    "Find the dominant soft blob, ignoring small intense speckles.",
]

CONTRASTIVE_CLASSES = ["bright nodule", "dark spot"]

DESCRIPTORS = [
    "It appears as a smooth oval slightly brighter than its surroundings.",
    "It looks like a soft gray ellipse with gentle edges.",
    "It is the largest mildly highlighted region in the frame.",
    "It appears faint, broad, and evenly filled.",
    "It looks dimmer than the small intense spots nearby.",
    "It is a single connected blob with a regular outline.",
    "It appears just above the background gray level.",
    "It looks homogeneous rather than speckled.",
    "It is elliptical, wider than ten pixels in every direction.",
    "It appears without sharp internal structure.",
]


@dataclass(frozen=True)
class _Ellipse:
    cx: float
    cy: float
    ax: float
    ay: float

    def region(self, size: int) -> np.ndarray:
        ys, xs = np.mgrid[0:size, 0:size]
        return ((xs - self.cx) / self.ax) ** 2 + ((ys - self.cy) / self.ay) ** 2 <= 1.0


def _place_ellipse(
    rng: np.random.Generator, axes: tuple[int, int], taken: np.ndarray, size: int
) -> _Ellipse | None:
    for _ in range(100):
        ax = float(rng.uniform(*axes))
        ay = float(rng.uniform(*axes))
        cx = float(rng.uniform(ax + PLACEMENT_MARGIN, size - ax - PLACEMENT_MARGIN))
        cy = float(rng.uniform(ay + PLACEMENT_MARGIN, size - ay - PLACEMENT_MARGIN))
        candidate = _Ellipse(cx, cy, ax + PLACEMENT_MARGIN, ay + PLACEMENT_MARGIN)
        if not (candidate.region(size) & taken).any():
            return _Ellipse(cx, cy, ax, ay)
    return None


def _truncated_normal(
    rng: np.random.Generator, shape, mean: float, std: float, lo: float, hi: float
) -> np.ndarray:
    values = rng.normal(mean, std, size=shape)
    return np.clip(values, lo, hi)


def generate_sample(
    rng: np.random.Generator, spec: MockWorldSpec
) -> tuple[ImageRgb8, BinaryMask]:
    """One image/mask pair; all randomness comes from the passed generator."""
    size = IMAGE_SIZE
    gray = _truncated_normal(
        rng,
        (size, size),
        BACKGROUND_MEAN,
        BACKGROUND_STD,
        BACKGROUND_MEAN - 3 * BACKGROUND_STD,
        BACKGROUND_MEAN + 3 * BACKGROUND_STD,
    )

    target = _place_ellipse(rng, TARGET_AXES, np.zeros((size, size), dtype=bool), size)
    region = target.region(size)
    lo, hi = spec.target_band
    gray[region] = _truncated_normal(
        rng, int(region.sum()), TARGET_MEAN, TARGET_STD, lo, hi
    )
    taken = region.copy()

    n_distractors = int(rng.integers(1, 3))
    names = list(DISTRACTOR_LEVELS)
    for _ in range(n_distractors):
        kind = names[int(rng.integers(len(names)))]
        mean, std = DISTRACTOR_LEVELS[kind]
        placed = _place_ellipse(rng, DISTRACTOR_AXES, taken, size)
        if placed is None:
            continue
        d_region = placed.region(size)
        band_lo, band_hi = spec.class_bands[kind]
        # Distractors stay below the grounding threshold so only transformed
        # images can ever produce a detection.
        ceiling = min(band_hi, spec.threshold - 2)
        gray[d_region] = _truncated_normal(
            rng, int(d_region.sum()), mean, std, band_lo, ceiling
        )
        taken |= d_region

    channel = np.rint(gray).clip(0, 255).astype(np.uint8)
    image = ImageRgb8(np.repeat(channel[:, :, None], 3, axis=2))
    return image, BinaryMask(region.astype(np.uint8))


def write_task_assets(out_dir: Path) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "grounding_sentences.txt").write_text(
        "\n".join(GROUNDING_SENTENCES) + "\n", encoding="utf-8"
    )
    (out_dir / "classes.txt").write_text(
        ", ".join(CONTRASTIVE_CLASSES) + "\n", encoding="utf-8"
    )
    (out_dir / "descriptors.txt").write_text("\n".join(DESCRIPTORS) + "\n", encoding="utf-8")
    task_path = out_dir / "task.json"
    task_path.write_text(
        json.dumps(
            {
                "target": TASK_TARGET,
                "whole": TASK_WHOLE,
                "grounding_sentences_path": "grounding_sentences.txt",
                "classes_path": "classes.txt",
                "descriptors_path": "descriptors.txt",
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return task_path


def generate_synthetic_benchmark(
    n: int, seed: int, spec: MockWorldSpec, out_dir: str | Path
) -> DatasetManifest:
    """Write n image/mask pairs plus the task assets and return the manifest."""
    if n < 1:
        raise ValueError("n must be >= 1")
    out_dir = Path(out_dir)
    (out_dir / "images").mkdir(parents=True, exist_ok=True)
    (out_dir / "masks").mkdir(parents=True, exist_ok=True)
    write_task_assets(out_dir)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    digits = max(4, int(math.log10(n)) + 1)
    for i in range(n):
        image, mask = generate_sample(rng, spec)
        sample_id = f"s{i:0{digits}d}"
        save_image(image, out_dir / "images" / f"{sample_id}.png")
        save_mask(mask, out_dir / "masks" / f"{sample_id}.png")
    return load_manifest(out_dir)
