"""Supplementary point-prompt generation from a box via dense-feature similarity.

The anchor is the box center; candidate cells inside the box are ranked by
cosine similarity to the anchor feature, the top k=10 are clustered, and
the cluster centroids become the extra positive points.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .core_types import BBox, ImageRgb8, Point2D
from .errors import EmptyBox, OutOfBounds

if TYPE_CHECKING:  # pragma: no cover
    from .backends.interfaces import FeatureBackend

CANDIDATE_POOL = 10
KMEANS_MAX_ITER = 100


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Dense per-cell feature grid with the pixel dimensions it was computed from."""

    array: np.ndarray  # (H', W', D) float
    image_width: int
    image_height: int

    def __post_init__(self) -> None:
        arr = np.ascontiguousarray(self.array, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError("FeatureMap array must have shape (H', W', D)")
        if not np.isfinite(arr).all():
            raise ValueError("FeatureMap values must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @property
    def height_cells(self) -> int:
        return self.array.shape[0]

    @property
    def width_cells(self) -> int:
        return self.array.shape[1]

    @property
    def dim(self) -> int:
        return self.array.shape[2]

    def cell_center(self, row: int, col: int) -> Point2D:
        """Pixel coordinates of a cell center.

        Centers sit where the feature_at grid coordinate is integral, i.e.
        (c + 0.5) * image_size / cells - 0.5 on each axis.
        """
        return Point2D(
            (col + 0.5) * self.image_width / self.width_cells - 0.5,
            (row + 0.5) * self.image_height / self.height_cells - 0.5,
        )

    def cell_of(self, p: Point2D) -> tuple[int, int]:
        """Grid cell whose center is nearest to a pixel coordinate."""
        row = int(np.floor((p.y + 0.5) * self.height_cells / self.image_height))
        col = int(np.floor((p.x + 0.5) * self.width_cells / self.image_width))
        return (
            min(max(row, 0), self.height_cells - 1),
            min(max(col, 0), self.width_cells - 1),
        )


def anchor_point(box: BBox) -> Point2D:
    """Geometric center of the box."""
    return Point2D((box.x_min + box.x_max) / 2.0, (box.y_min + box.y_max) / 2.0)


def feature_at(fm: FeatureMap, p: Point2D) -> np.ndarray:
    """Bilinearly interpolated feature vector at a pixel coordinate.

    Pixel coordinates map to grid coordinates by uniform scaling with
    half-cell offsets; interpolation clamps at the grid border.
    """
    if not (0 <= p.x < fm.image_width and 0 <= p.y < fm.image_height):
        raise OutOfBounds(f"point {p} outside image {fm.image_width}x{fm.image_height}")
    gx = (p.x + 0.5) * fm.width_cells / fm.image_width - 0.5
    gy = (p.y + 0.5) * fm.height_cells / fm.image_height - 0.5
    gx = min(max(gx, 0.0), fm.width_cells - 1.0)
    gy = min(max(gy, 0.0), fm.height_cells - 1.0)
    x0, y0 = int(gx), int(gy)
    x1 = min(x0 + 1, fm.width_cells - 1)
    y1 = min(y0 + 1, fm.height_cells - 1)
    fx, fy = gx - x0, gy - y0
    grid = fm.array
    return (
        (1 - fy) * (1 - fx) * grid[y0, x0]
        + (1 - fy) * fx * grid[y0, x1]
        + fy * (1 - fx) * grid[y1, x0]
        + fy * fx * grid[y1, x1]
    )


def topk_similar(
    fm: FeatureMap, anchor_feat: np.ndarray, box: BBox, k: int
) -> list[tuple[Point2D, float]]:
    """Top-k in-box cells by cosine similarity to the anchor feature.

    Candidates are cell centers falling inside the box, excluding the cell
    that contains the anchor point; ties break on row-major cell index.
    Returns fewer than k entries when the candidate pool is smaller.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    anchor = np.asarray(anchor_feat, dtype=np.float64)
    anchor_norm = np.linalg.norm(anchor)
    if anchor_norm == 0.0:
        raise ValueError("anchor feature must be nonzero")
    anchor_row, anchor_col = fm.cell_of(anchor_point(box))

    candidates: list[tuple[float, int, Point2D]] = []
    for row in range(fm.height_cells):
        for col in range(fm.width_cells):
            if (row, col) == (anchor_row, anchor_col):
                continue
            center = fm.cell_center(row, col)
            if not box.contains(center.x, center.y):
                continue
            vec = fm.array[row, col]
            norm = np.linalg.norm(vec)
            sim = 0.0 if norm == 0.0 else float(anchor @ vec / (anchor_norm * norm))
            candidates.append((sim, row * fm.width_cells + col, center))
    if not candidates:
        raise EmptyBox(f"no feature cells inside {box}")
    candidates.sort(key=lambda entry: (-entry[0], entry[1]))
    return [(center, sim) for sim, _, center in candidates[:k]]


def kmeans_centroids(points: list[Point2D], n: int, seed: int) -> list[Point2D]:
    """Cluster 2D points with seeded k-means++ Lloyd iterations.

    When there are at most n points they are returned directly. Empty
    clusters are re-seeded to the point farthest from its assigned
    centroid. Output is sorted by (y, x) for determinism.
    """
    if not points:
        raise ValueError("points must be non-empty")
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(points) <= n:
        return sorted(points, key=lambda p: (p.y, p.x))

    data = np.array([[p.x, p.y] for p in points], dtype=np.float64)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    # k-means++ seeding
    centroids = [data[int(rng.integers(len(data)))]]
    for _ in range(n - 1):
        d2 = np.min(
            [((data - c) ** 2).sum(axis=1) for c in centroids], axis=0
        )
        total = d2.sum()
        if total <= 0:
            centroids.append(data[int(rng.integers(len(data)))])
            continue
        target = rng.uniform(0.0, total)
        idx = int(np.searchsorted(np.cumsum(d2), target, side="right"))
        centroids.append(data[min(idx, len(data) - 1)])
    centers = np.array(centroids)

    assign = np.full(len(data), -1, dtype=np.int64)
    for _ in range(KMEANS_MAX_ITER):
        d2 = ((data[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for ci in range(n):
            members = data[assign == ci]
            if len(members):
                centers[ci] = members.mean(axis=0)
            else:
                dist_own = d2[np.arange(len(data)), assign]
                far = int(np.argmax(dist_own))
                centers[ci] = data[far]
                assign[far] = ci

    result = [Point2D(float(c[0]), float(c[1])) for c in centers]
    return sorted(result, key=lambda p: (p.y, p.x))


def boost(
    image_for_features: ImageRgb8,
    box: BBox,
    n_points: int,
    feature_backend: "FeatureBackend",
    seed: int = 0,
) -> list[Point2D]:
    """Generate up to n_points positive point prompts inside the box.

    n_points = 0 skips boosting. Degenerate boxes (no candidate cells, or a
    zero anchor feature) yield an empty prompt list rather than an error.
    """
    if not 0 <= n_points <= 5:
        raise ValueError("n_points must lie in [0, 5]")
    if n_points == 0:
        return []
    fm = feature_backend.features(image_for_features)
    anchor = anchor_point(box)
    anchor_feat = feature_at(fm, anchor)
    if np.linalg.norm(anchor_feat) == 0.0:
        return []
    try:
        ranked = topk_similar(fm, anchor_feat, box, CANDIDATE_POOL)
    except EmptyBox:
        return []
    points = [p for p, _ in ranked]
    return kmeans_centroids(points, n_points, seed)
