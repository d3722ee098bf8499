"""Deterministic input-adaptation transforms: HSV shift, RGB shift, CLAHE, unsharp mask.

All operators are pure functions on 8-bit RGB rasters; the chain applies
them in the fixed order HSV -> RGB -> CLAHE -> unsharp.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core_types import ImageRgb8

CLAHE_BINS = 256
UNSHARP_SIGMA = 2.0
UNSHARP_RADIUS = 5


@dataclass(frozen=True)
class TransformParams:
    """One transform block of a configuration."""

    hsv_hue_shift: int = 0
    hsv_sat_shift: int = 0
    hsv_val_shift: int = 0
    r_shift: int = 0
    g_shift: int = 0
    b_shift: int = 0
    clahe_clip: float = 0.0
    clahe_grid: int = 1
    edge_strength: float = 0.0

    def __post_init__(self) -> None:
        _check_range("hsv_hue_shift", self.hsv_hue_shift, 0, 20)
        _check_range("hsv_sat_shift", self.hsv_sat_shift, 0, 30)
        _check_range("hsv_val_shift", self.hsv_val_shift, 0, 30)
        _check_range("r_shift", self.r_shift, 0, 20)
        _check_range("g_shift", self.g_shift, 0, 20)
        _check_range("b_shift", self.b_shift, 0, 20)
        _check_range("clahe_clip", self.clahe_clip, 0.0, 4.0)
        _check_range("clahe_grid", self.clahe_grid, 1, 4)
        _check_range("edge_strength", self.edge_strength, 0.0, 1.0)

    @classmethod
    def from_mapping(cls, values: Mapping[str, float], prefix: str) -> "TransformParams":
        """Extract one prefixed block (e.g. 'grd_') from a flat configuration map."""
        return cls(
            hsv_hue_shift=int(values[prefix + "hsv_hue_shift"]),
            hsv_sat_shift=int(values[prefix + "hsv_sat_shift"]),
            hsv_val_shift=int(values[prefix + "hsv_val_shift"]),
            r_shift=int(values[prefix + "r_shift"]),
            g_shift=int(values[prefix + "g_shift"]),
            b_shift=int(values[prefix + "b_shift"]),
            clahe_clip=float(values[prefix + "clahe_clip"]),
            clahe_grid=int(values[prefix + "clahe_grid"]),
            edge_strength=float(values[prefix + "edge_strength"]),
        )


def _check_range(name: str, value, lo, hi) -> None:
    if not lo <= value <= hi:
        raise ValueError(f"{name}={value} outside [{lo}, {hi}]")


def luminance(rgb: np.ndarray) -> np.ndarray:
    """BT.601 luma of an (..., 3) float or uint8 array, as float64."""
    arr = rgb.astype(np.float64, copy=False)
    return 0.299 * arr[..., 0] + 0.587 * arr[..., 1] + 0.114 * arr[..., 2]


def _rgb_to_hsv(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # H in [0, 360); S, V in [0, 255]. Ties resolve in R, G, B branch order.
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    v = arr.max(axis=-1)
    delta = v - arr.min(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(v > 0, delta / v * 255.0, 0.0)
        h = np.select(
            [delta == 0, r == v, g == v],
            [
                0.0,
                60.0 * (((g - b) / delta) % 6.0),
                60.0 * ((b - r) / delta + 2.0),
            ],
            default=60.0 * ((r - g) / delta + 4.0),
        )
    return h, s, v


def _hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    sf = s / 255.0
    c = v * sf
    hp = h / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    sextant = np.floor(hp).astype(np.int64) % 6
    zero = np.zeros_like(c)
    r1 = np.choose(sextant, [c, x, zero, zero, x, c])
    g1 = np.choose(sextant, [x, c, c, x, zero, zero])
    b1 = np.choose(sextant, [zero, zero, x, c, c, x])
    m = v - c
    return np.stack([r1 + m, g1 + m, b1 + m], axis=-1)


def hsv_shift(img: ImageRgb8, hue: int, sat: int, val: int) -> ImageRgb8:
    """Rotate hue by 2*hue degrees and add sat/val offsets with clamping.

    Zero shifts short-circuit to the exact identity; otherwise each pixel
    takes one float RGB->HSV->RGB round trip and is rounded per channel.
    """
    _check_range("hue", hue, 0, 20)
    _check_range("sat", sat, 0, 30)
    _check_range("val", val, 0, 30)
    if hue == 0 and sat == 0 and val == 0:
        return img
    arr = img.array.astype(np.float64)
    h, s, v = _rgb_to_hsv(arr)
    h = (h + 2.0 * hue) % 360.0
    s = np.clip(s + sat, 0.0, 255.0)
    v = np.clip(v + val, 0.0, 255.0)
    out = _hsv_to_rgb(h, s, v)
    return ImageRgb8(np.rint(out).clip(0, 255).astype(np.uint8))


def rgb_shift(img: ImageRgb8, r: int, g: int, b: int) -> ImageRgb8:
    """Add per-channel offsets, clamped to [0, 255]."""
    _check_range("r", r, 0, 20)
    _check_range("g", g, 0, 20)
    _check_range("b", b, 0, 20)
    if r == 0 and g == 0 and b == 0:
        return img
    shifted = img.array.astype(np.int16) + np.array([r, g, b], dtype=np.int16)
    return ImageRgb8(shifted.clip(0, 255).astype(np.uint8))


def _tile_edges(size: int, grid: int) -> list[int]:
    return [(i * size) // grid for i in range(grid)] + [size]


def clahe_tile_transforms(
    luma_bins: np.ndarray, clip: float, grid: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-tile clipped histograms and value mappings.

    Each tile's 256-bin histogram is clipped at clip * tile_pixels / 256,
    the excess is spread uniformly over all bins, and the mapping is the
    rescaled cumulative sum. The effective grid clamps to the image size
    so tiles are never empty. Returns (histograms, mappings), both shaped
    (grid_y, grid_x, 256); mappings are unrounded floats.
    """
    height, width = luma_bins.shape
    grid_y = min(grid, height)
    grid_x = min(grid, width)
    hists = np.empty((grid_y, grid_x, CLAHE_BINS), dtype=np.float64)
    maps = np.empty((grid_y, grid_x, CLAHE_BINS), dtype=np.float64)
    ys = _tile_edges(height, grid_y)
    xs = _tile_edges(width, grid_x)
    for ti in range(grid_y):
        for tj in range(grid_x):
            tile = luma_bins[ys[ti] : ys[ti + 1], xs[tj] : xs[tj + 1]]
            n_tile = tile.size
            hist = np.bincount(tile.ravel(), minlength=CLAHE_BINS).astype(np.float64)
            limit = clip * n_tile / CLAHE_BINS
            clipped = np.minimum(hist, limit)
            excess = n_tile - clipped.sum()
            clipped += excess / CLAHE_BINS
            hists[ti, tj] = clipped
            maps[ti, tj] = np.cumsum(clipped) * (255.0 / n_tile)
    return hists, maps


def clahe(img: ImageRgb8, clip: float, grid: int) -> ImageRgb8:
    """Contrast-limited adaptive histogram equalization on luminance.

    clip <= 1e-9 disables the operator entirely. Luminance is remapped per
    grid x grid tile and pixels blend the four surrounding tile mappings
    bilinearly (edge tiles clamp); the luminance delta is added back to all
    three channels so chroma differences are preserved.
    """
    _check_range("clip", clip, 0.0, 4.0)
    _check_range("grid", grid, 1, 4)
    if clip <= 1e-9:
        return img
    arr = img.array.astype(np.float64)
    height, width = arr.shape[:2]
    luma_bins = np.rint(luminance(arr)).clip(0, 255).astype(np.int64)
    _, maps = clahe_tile_transforms(luma_bins, clip, grid)
    grid_y, grid_x = maps.shape[:2]

    ty = np.clip((np.arange(height) + 0.5) * grid_y / height - 0.5, 0.0, grid_y - 1.0)
    tx = np.clip((np.arange(width) + 0.5) * grid_x / width - 0.5, 0.0, grid_x - 1.0)
    i0 = np.floor(ty).astype(np.int64)
    j0 = np.floor(tx).astype(np.int64)
    i1 = np.minimum(i0 + 1, grid_y - 1)
    j1 = np.minimum(j0 + 1, grid_x - 1)
    fy = (ty - i0)[:, None]
    fx = (tx - j0)[None, :]

    i0g = i0[:, None]
    i1g = i1[:, None]
    j0g = j0[None, :]
    j1g = j1[None, :]
    mapped = (
        (1 - fy) * (1 - fx) * maps[i0g, j0g, luma_bins]
        + (1 - fy) * fx * maps[i0g, j1g, luma_bins]
        + fy * (1 - fx) * maps[i1g, j0g, luma_bins]
        + fy * fx * maps[i1g, j1g, luma_bins]
    )
    delta = mapped - luma_bins
    out = np.rint(arr + delta[:, :, None]).clip(0, 255).astype(np.uint8)
    return ImageRgb8(out)


def gaussian_kernel(sigma: float = UNSHARP_SIGMA, radius: int = UNSHARP_RADIUS) -> np.ndarray:
    taps = np.exp(-np.arange(-radius, radius + 1) ** 2 / (2.0 * sigma * sigma))
    return taps / taps.sum()


def _blur_separable(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    # Edge-replicated separable convolution over the two leading axes.
    radius = len(kernel) // 2
    out = np.zeros_like(arr)
    padded = np.pad(arr, [(radius, radius), (0, 0), (0, 0)], mode="edge")
    for k, w in enumerate(kernel):
        out += w * padded[k : k + arr.shape[0]]
    arr2 = out
    out = np.zeros_like(arr2)
    padded = np.pad(arr2, [(0, 0), (radius, radius), (0, 0)], mode="edge")
    for k, w in enumerate(kernel):
        out += w * padded[:, k : k + arr.shape[1]]
    return out


def unsharp_mask(img: ImageRgb8, strength: float) -> ImageRgb8:
    """Sharpen by adding strength * (image - gaussian blur), per channel."""
    _check_range("strength", strength, 0.0, 1.0)
    if strength == 0.0:
        return img
    arr = img.array.astype(np.float64)
    blurred = _blur_separable(arr, gaussian_kernel())
    out = np.rint(arr + strength * (arr - blurred)).clip(0, 255).astype(np.uint8)
    return ImageRgb8(out)


def apply_transform_chain(img: ImageRgb8, params: TransformParams) -> ImageRgb8:
    """Apply HSV shift, RGB shift, CLAHE, then unsharp masking."""
    out = hsv_shift(img, params.hsv_hue_shift, params.hsv_sat_shift, params.hsv_val_shift)
    out = rgb_shift(out, params.r_shift, params.g_shift, params.b_shift)
    out = clahe(out, params.clahe_clip, params.clahe_grid)
    out = unsharp_mask(out, params.edge_strength)
    return out
