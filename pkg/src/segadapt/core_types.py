"""Shared domain types: images, masks, boxes, points, and task definitions."""
from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, MissingAsset, MissingBackgroundClass

BACKGROUND_CLASS = "background"


@dataclass(frozen=True, eq=False)
class ImageRgb8:
    """Dense 8-bit RGB raster, stored as an immutable (H, W, 3) uint8 array."""

    array: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.array, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("ImageRgb8 array must have shape (H, W, 3)")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("ImageRgb8 must be at least 1x1")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Binary raster, 1 = target foreground; dimensions match the annotated image."""

    array: np.ndarray

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.array, dtype=np.uint8)
        if arr.ndim != 2:
            raise ValueError("BinaryMask array must have shape (H, W)")
        if arr.size and arr.max() > 1:
            raise ValueError("BinaryMask values must be 0 or 1")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def height(self) -> int:
        return self.array.shape[0]

    @property
    def width(self) -> int:
        return self.array.shape[1]

    @property
    def area(self) -> int:
        return int(self.array.sum())


@dataclass(frozen=True)
class BBox:
    """Axis-aligned pixel box; max edges are exclusive so width = x_max - x_min."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"degenerate box {self}")
        if self.x_min < 0 or self.y_min < 0:
            raise ValueError(f"negative box origin {self}")

    @property
    def width(self) -> int:
        return self.x_max - self.x_min

    @property
    def height(self) -> int:
        return self.y_max - self.y_min

    def validate_within(self, width: int, height: int) -> None:
        if self.x_max > width or self.y_max > height:
            raise ValueError(f"box {self} exceeds image {width}x{height}")

    def clamped(self, width: int, height: int) -> "BBox":
        return BBox(
            max(0, min(self.x_min, width - 1)),
            max(0, min(self.y_min, height - 1)),
            min(width, max(self.x_max, self.x_min + 1)),
            min(height, max(self.y_max, self.y_min + 1)),
        )

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x < self.x_max and self.y_min <= y < self.y_max


@dataclass(frozen=True)
class Point2D:
    """Continuous pixel coordinates."""

    x: float
    y: float


@dataclass(frozen=True)
class TaskDefinition:
    """Segmentation task: target/context names plus the text assets driving the pipeline."""

    target: str
    whole: str
    grounding_sentences: tuple[str, ...]
    contrastive_classes: tuple[str, ...]
    descriptors: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.grounding_sentences) < 1:
            raise MissingAsset("task has no grounding sentences")
        n_bg = sum(1 for c in self.contrastive_classes if c == BACKGROUND_CLASS)
        if n_bg != 1:
            raise MissingBackgroundClass(
                f"contrastive classes must contain '{BACKGROUND_CLASS}' exactly once, found {n_bg}"
            )


def _to_rgb8(img: Image.Image) -> np.ndarray:
    if img.mode in ("I;16", "I;16B", "I;16L", "I"):
        raw = np.asarray(img, dtype=np.int64)
        peak = int(raw.max())
        if peak <= 0:
            gray = np.zeros(raw.shape, dtype=np.uint8)
        else:
            gray = np.rint(raw * (255.0 / peak)).clip(0, 255).astype(np.uint8)
        return np.repeat(gray[:, :, None], 3, axis=2)
    if img.mode == "L":
        gray = np.asarray(img, dtype=np.uint8)
        return np.repeat(gray[:, :, None], 3, axis=2)
    return np.asarray(img.convert("RGB"), dtype=np.uint8)


def load_image(path: str | Path) -> ImageRgb8:
    """Load a PNG as 8-bit RGB.

    Grayscale inputs are replicated to three channels; 16-bit inputs are
    rescaled to 8-bit by dividing by the image maximum.
    """
    try:
        with Image.open(path) as img:
            img.load()
            return ImageRgb8(_to_rgb8(img))
    except FileNotFoundError:
        raise
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc


def save_image(image: ImageRgb8, path: str | Path) -> None:
    Image.fromarray(image.array, mode="RGB").save(path, format="PNG")


def encode_image_png(image: ImageRgb8) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image.array, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def decode_image_png(data: bytes) -> ImageRgb8:
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.load()
            return ImageRgb8(_to_rgb8(img))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode PNG payload: {exc}") from exc


def save_mask(mask: BinaryMask, path: str | Path) -> None:
    Image.fromarray(mask.array * np.uint8(255), mode="L").save(path, format="PNG")


def load_mask(path: str | Path) -> BinaryMask:
    try:
        with Image.open(path) as img:
            gray = np.asarray(img.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode {path}: {exc}") from exc
    return BinaryMask((gray > 127).astype(np.uint8))


def encode_mask_png(mask: BinaryMask) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(mask.array * np.uint8(255), mode="L").save(buf, format="PNG")
    return buf.getvalue()


def decode_mask_png(data: bytes) -> BinaryMask:
    try:
        with Image.open(io.BytesIO(data)) as img:
            gray = np.asarray(img.convert("L"), dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise DecodeError(f"cannot decode mask payload: {exc}") from exc
    return BinaryMask((gray > 127).astype(np.uint8))


def _read_lines(path: Path) -> list[str]:
    if not path.is_file():
        raise MissingAsset(f"text asset not found: {path}")
    lines = [ln.strip() for ln in path.read_text(encoding="utf-8").splitlines()]
    return [ln for ln in lines if ln]


def _read_classes(path: Path) -> list[str]:
    # Classes may arrive one-per-line or as a single comma-separated line.
    lines = _read_lines(path)
    if len(lines) == 1 and "," in lines[0]:
        return [part.strip() for part in lines[0].split(",") if part.strip()]
    return lines


def load_task(path: str | Path) -> TaskDefinition:
    """Load a task descriptor JSON and its referenced text assets.

    Asset paths are resolved relative to the descriptor file. The
    'background' contrastive class is appended when the classes file does
    not already provide it.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingAsset(f"task descriptor not found: {path}")
    try:
        desc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MissingAsset(f"task descriptor {path} is not valid JSON: {exc}") from exc
    root = path.parent
    try:
        target = desc["target"]
        whole = desc["whole"]
        sentences = _read_lines(root / desc["grounding_sentences_path"])
        classes = _read_classes(root / desc["classes_path"])
        descriptors = _read_lines(root / desc["descriptors_path"])
    except KeyError as exc:
        raise MissingAsset(f"task descriptor {path} missing field {exc}") from exc
    if not sentences:
        raise MissingAsset(f"no grounding sentences in {desc['grounding_sentences_path']}")
    if not descriptors:
        raise MissingAsset(f"no descriptors in {desc['descriptors_path']}")
    if BACKGROUND_CLASS not in classes:
        classes = classes + [BACKGROUND_CLASS]
    return TaskDefinition(
        target=target,
        whole=whole,
        grounding_sentences=tuple(sentences),
        contrastive_classes=tuple(classes),
        descriptors=tuple(descriptors),
    )


def mask_sequence_equal(a: Sequence[BinaryMask], b: Sequence[BinaryMask]) -> bool:
    return len(a) == len(b) and all(
        np.array_equal(x.array, y.array) for x, y in zip(a, b)
    )
