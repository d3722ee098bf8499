from __future__ import annotations

import numpy as np
import pytest
from scipy import ndimage

from segadapt import BBox, ImageRgb8, MockWorldSpec, Point2D, mock_backends
from segadapt.errors import NoDetection


def gray_image(gray: np.ndarray) -> ImageRgb8:
    return ImageRgb8(np.repeat(gray.astype(np.uint8)[:, :, None], 3, axis=2))


class TestGrounding:
    def test_tight_box_of_bright_region(self, backends):
        gray = np.full((32, 32), 50, dtype=np.uint8)
        gray[10:20, 4:9] = 230
        box = backends.grounding.ground(gray_image(gray), "find the block")
        assert (box.x_min, box.y_min, box.x_max, box.y_max) == (4, 10, 9, 20)

    def test_matches_connected_components_oracle(self, backends, rng):
        gray = np.full((48, 48), 80, dtype=np.uint8)
        for _ in range(3):
            y, x = int(rng.integers(4, 40)), int(rng.integers(4, 40))
            h, w = int(rng.integers(2, 8)), int(rng.integers(2, 8))
            gray[y : y + h, x : x + w] = 240
        box = backends.grounding.ground(gray_image(gray), "query")
        labels, n = ndimage.label(gray >= 200, structure=np.ones((3, 3)))
        sizes = np.bincount(labels.ravel())
        sizes[0] = 0
        ys, xs = np.nonzero(labels == np.argmax(sizes))
        assert (box.x_min, box.y_min) == (xs.min(), ys.min())
        assert (box.x_max, box.y_max) == (xs.max() + 1, ys.max() + 1)

    def test_below_threshold_raises_no_detection(self, backends):
        gray = np.full((16, 16), 150, dtype=np.uint8)
        with pytest.raises(NoDetection):
            backends.grounding.ground(gray_image(gray), "anything")

    def test_empty_sentence_rejected(self, backends):
        gray = np.full((8, 8), 250, dtype=np.uint8)
        with pytest.raises(ValueError):
            backends.grounding.ground(gray_image(gray), "")

    def test_largest_component_wins(self, backends):
        gray = np.full((32, 32), 10, dtype=np.uint8)
        gray[2:5, 2:5] = 255  # 9 px
        gray[10:20, 10:25] = 255  # 150 px
        box = backends.grounding.ground(gray_image(gray), "big one")
        assert (box.x_min, box.y_min, box.x_max, box.y_max) == (10, 10, 25, 20)


class TestSegmentation:
    def test_otsu_splits_two_level_box(self, backends):
        gray = np.full((24, 24), 40, dtype=np.uint8)
        gray[8:16, 8:16] = 200
        box = BBox(4, 4, 20, 20)
        mask = backends.segmentation.segment(gray_image(gray), box, [])
        expected = np.zeros((24, 24), dtype=np.uint8)
        expected[8:16, 8:16] = 1
        assert np.array_equal(mask.array, expected)

    def test_degenerate_interior_fills_box(self, backends):
        gray = np.full((16, 16), 99, dtype=np.uint8)
        box = BBox(2, 3, 10, 12)
        mask = backends.segmentation.segment(gray_image(gray), box, [])
        expected = np.zeros((16, 16), dtype=np.uint8)
        expected[3:12, 2:10] = 1
        assert np.array_equal(mask.array, expected)

    def test_point_prompt_selects_component(self, backends):
        # two bright blobs; the center pixel lies between them, a point picks one
        gray = np.full((20, 40), 30, dtype=np.uint8)
        gray[4:8, 4:12] = 220  # left blob, 32 px
        gray[12:18, 26:36] = 220  # right blob, 60 px
        box = BBox(0, 0, 40, 20)
        no_points = backends.segmentation.segment(gray_image(gray), box, [])
        assert no_points.array[14, 30] == 1 and no_points.array[5, 6] == 0
        with_point = backends.segmentation.segment(
            gray_image(gray), box, [Point2D(6.0, 5.0)]
        )
        assert with_point.array[5, 6] == 1 and with_point.array[14, 30] == 0

    def test_mask_dimensions_match_image(self, backends, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(18, 27, 3), dtype=np.uint8))
        mask = backends.segmentation.segment(img, BBox(3, 2, 20, 15), [])
        assert (mask.height, mask.width) == (18, 27)
        assert mask.array[:2].sum() == 0  # nothing outside the box


class TestFeatures:
    def test_constant_image_constant_features(self, backends):
        img = ImageRgb8(np.full((32, 32, 3), 144, dtype=np.uint8))
        fm = backends.features.features(img)
        assert np.allclose(fm.array, fm.array[0, 0])
        assert np.allclose(fm.array[0, 0, :3], 144.0)
        assert np.allclose(fm.array[0, 0, 3:], 0.0)

    def test_grid_shape(self, backends):
        img = ImageRgb8(np.zeros((64, 64, 3), dtype=np.uint8))
        fm = backends.features.features(img)
        assert (fm.height_cells, fm.width_cells, fm.dim) == (8, 8, 6)

    def test_ragged_grid_shape(self, backends):
        img = ImageRgb8(np.zeros((20, 17, 3), dtype=np.uint8))
        fm = backends.features.features(img)
        assert (fm.height_cells, fm.width_cells) == (3, 3)

    def test_window_statistics(self, world_spec, backends):
        rng = np.random.Generator(np.random.PCG64(5))
        arr = rng.integers(0, 256, size=(8, 8, 3), dtype=np.uint8)
        fm = backends.features.features(ImageRgb8(arr))
        assert fm.array.shape == (1, 1, 6)
        assert np.allclose(fm.array[0, 0, :3], arr.reshape(-1, 3).mean(axis=0))


class TestScoring:
    def test_classify_band_fractions_softmaxed(self, backends):
        gray = np.zeros((10, 10), dtype=np.uint8)
        gray[:5] = 140  # target band [125, 155]
        gray[5:] = 110  # background band [96, 124]
        probs = backends.scoring.classify(
            gray_image(gray), ["lesion", "background", "dark spot"]
        )
        raw = np.array([0.5, 0.5, 0.0])
        expected = np.exp(raw - raw.max())
        expected /= expected.sum()
        assert np.allclose(probs, expected, atol=1e-9)
        assert sum(probs) == pytest.approx(1.0, abs=1e-6)

    def test_classify_single_label(self, backends, rng):
        img = ImageRgb8(rng.integers(1, 256, size=(6, 6, 3), dtype=np.uint8))
        assert backends.scoring.classify(img, ["lesion"]) == [1.0]

    def test_classify_unknown_label_gets_zero_fraction(self, backends):
        gray = np.full((4, 4), 140, dtype=np.uint8)
        probs = backends.scoring.classify(gray_image(gray), ["lesion", "mystery"])
        assert probs[0] > probs[1]

    def test_match_texts_target_band_fraction(self, backends):
        gray = np.zeros((10, 10), dtype=np.uint8)
        gray[:4] = 140
        gray[4:] = 60
        sims = backends.scoring.match_texts(gray_image(gray), ["a", "b", "c"])
        assert sims == [pytest.approx(0.4)] * 3

    def test_all_black_scores_zero(self, backends):
        img = ImageRgb8(np.zeros((8, 8, 3), dtype=np.uint8))
        assert backends.scoring.match_texts(img, ["x"]) == [0.0]
        probs = backends.scoring.classify(img, ["lesion", "background"])
        assert probs == [pytest.approx(0.5), pytest.approx(0.5)]


def test_mocks_are_pure(world_spec, rng):
    b1 = mock_backends(world_spec)
    b2 = mock_backends(world_spec)
    gray = np.full((24, 24), 90, dtype=np.uint8)
    gray[6:12, 6:12] = 240
    img = gray_image(gray)
    box1 = b1.grounding.ground(img, "s")
    box2 = b2.grounding.ground(img, "s")
    assert box1 == box2
    m1 = b1.segmentation.segment(img, box1, [])
    m2 = b2.segmentation.segment(img, box2, [])
    assert np.array_equal(m1.array, m2.array)
    assert np.array_equal(b1.features.features(img).array, b2.features.features(img).array)
    assert b1.scoring.classify(img, ["a", "b"]) == b2.scoring.classify(img, ["a", "b"])


def test_world_spec_validation():
    with pytest.raises(ValueError):
        MockWorldSpec(target_band=(100, 300))
    with pytest.raises(ValueError):
        MockWorldSpec(feature_window=0)
