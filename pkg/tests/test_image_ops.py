from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from segadapt import ImageRgb8, TransformParams, apply_transform_chain
from segadapt.image_ops import (
    clahe,
    clahe_tile_transforms,
    gaussian_kernel,
    hsv_shift,
    luminance,
    rgb_shift,
    unsharp_mask,
)
from tests.conftest import random_image
from tests.oracles import (
    clahe_reference,
    hsv_shift_pixel,
    rgb_shift_loop,
    unsharp_reference,
)


class TestHsvShift:
    def test_zero_shift_short_circuits_to_identity(self, rng):
        img = random_image(rng)
        out = hsv_shift(img, 0, 0, 0)
        assert out is img

    def test_white_unaffected_by_hue(self):
        img = ImageRgb8(np.full((3, 3, 3), 255, dtype=np.uint8))
        for hue in (1, 10, 20):
            assert np.array_equal(hsv_shift(img, hue, 0, 0).array, img.array)

    def test_pure_red_hue_20(self):
        # H=0 rotated by 2*20=40 degrees at full saturation/value.
        img = ImageRgb8(np.array([[[255, 0, 0]]], dtype=np.uint8))
        expected = hsv_shift_pixel(255, 0, 0, 20, 0, 0)
        assert tuple(hsv_shift(img, 20, 0, 0).array[0, 0]) == expected
        assert expected == (255, 170, 0)

    def test_matches_scalar_oracle_on_random_pixels(self, rng):
        img = random_image(rng, 8, 8)
        out = hsv_shift(img, 7, 12, 5).array
        for y in range(8):
            for x in range(8):
                r, g, b = (int(v) for v in img.array[y, x])
                assert tuple(out[y, x]) == hsv_shift_pixel(r, g, b, 7, 12, 5)

    def test_rejects_out_of_range(self, rng):
        with pytest.raises(ValueError):
            hsv_shift(random_image(rng), 21, 0, 0)


class TestRgbShift:
    def test_zero_is_identity(self, rng):
        img = random_image(rng)
        assert np.array_equal(rgb_shift(img, 0, 0, 0).array, img.array)

    def test_clamps_at_255(self):
        img = ImageRgb8(np.array([[[250, 0, 0]]], dtype=np.uint8))
        assert tuple(rgb_shift(img, 20, 0, 0).array[0, 0]) == (255, 0, 0)

    def test_matches_pixel_loop_oracle(self, rng):
        img = random_image(rng, 11, 7)
        out = rgb_shift(img, 5, 7, 9).array
        assert np.array_equal(out, rgb_shift_loop(img.array, 5, 7, 9))


class TestClahe:
    def test_clip_zero_is_identity(self, rng):
        img = random_image(rng)
        assert clahe(img, 0.0, 3) is img

    def test_uniform_histogram_unchanged_within_one(self):
        # 16x16 gray ramp: every luminance bin appears exactly once.
        values = np.arange(256, dtype=np.uint8).reshape(16, 16)
        img = ImageRgb8(np.repeat(values[:, :, None], 3, axis=2))
        out = clahe(img, 4.0, 1)
        diff = out.array.astype(int) - img.array.astype(int)
        assert np.abs(diff).max() <= 1

    @pytest.mark.parametrize("clip,grid", [(2.0, 2), (4.0, 1), (3.0, 4)])
    def test_matches_reference_implementation(self, rng, clip, grid):
        arr = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        # two-region image: bright block on dark field
        arr[8:24, 8:24] = rng.integers(160, 230, size=(16, 16, 3), dtype=np.uint8)
        out = clahe(ImageRgb8(arr), clip, grid).array.astype(int)
        ref = clahe_reference(arr, clip, grid).astype(int)
        assert np.abs(out - ref).max() <= 1

    def test_tile_histogram_clip_bound(self, rng):
        arr = rng.integers(0, 256, size=(40, 40, 3), dtype=np.uint8)
        luma_bins = np.rint(luminance(arr.astype(np.float64))).clip(0, 255).astype(np.int64)
        clip, grid = 2.0, 2
        hists, _ = clahe_tile_transforms(luma_bins, clip, grid)
        for ti in range(grid):
            for tj in range(grid):
                n_tile = 20 * 20
                limit = clip * n_tile / 256.0
                raw = np.bincount(
                    luma_bins[ti * 20 : (ti + 1) * 20, tj * 20 : (tj + 1) * 20].ravel(),
                    minlength=256,
                ).astype(float)
                excess = n_tile - np.minimum(raw, limit).sum()
                assert hists[ti, tj].max() <= limit + excess / 256.0 + 1e-9

    def test_preserves_dimensions_and_range(self, rng):
        img = random_image(rng, 13, 29)
        out = clahe(img, 3.5, 4)
        assert out.array.shape == img.array.shape
        assert out.array.dtype == np.uint8


class TestUnsharp:
    def test_zero_strength_identity(self, rng):
        img = random_image(rng)
        out = unsharp_mask(img, 0.0)
        assert np.array_equal(out.array, img.array)

    def test_constant_image_fixed_point(self):
        img = ImageRgb8(np.full((12, 9, 3), 77, dtype=np.uint8))
        assert np.array_equal(unsharp_mask(img, 1.0).array, img.array)

    def test_step_edge_matches_direct_convolution_oracle(self):
        arr = np.full((12, 16, 3), 60, dtype=np.uint8)
        arr[:, 8:] = 180
        out = unsharp_mask(ImageRgb8(arr), 1.0).array.astype(int)
        ref = unsharp_reference(arr, 1.0, gaussian_kernel()).astype(int)
        assert np.abs(out - ref).max() == 0
        # undershoot on the dark side of the edge, overshoot on the bright side
        assert out[5, 7, 0] < 60
        assert out[5, 8, 0] > 180
        assert out[5, 0, 0] == 60 and out[5, 15, 0] == 180

    def test_random_image_matches_oracle(self, rng):
        img = random_image(rng, 10, 10)
        out = unsharp_mask(img, 0.6).array.astype(int)
        ref = unsharp_reference(img.array, 0.6, gaussian_kernel()).astype(int)
        assert np.abs(out - ref).max() <= 1


class TestTransformChain:
    def test_base_params_exact_identity(self, rng):
        img = random_image(rng)
        out = apply_transform_chain(img, TransformParams())
        assert np.array_equal(out.array, img.array)

    def test_one_pixel_image(self, rng):
        img = ImageRgb8(np.array([[[13, 200, 90]]], dtype=np.uint8))
        params = TransformParams(
            hsv_hue_shift=5, hsv_sat_shift=3, hsv_val_shift=9,
            r_shift=2, g_shift=4, b_shift=6,
            clahe_clip=2.5, clahe_grid=2, edge_strength=0.8,
        )
        out = apply_transform_chain(img, params)
        assert out.array.shape == (1, 1, 3)

    def test_deterministic_across_runs_and_threads(self, rng):
        img = random_image(rng, 48, 48)
        params = TransformParams(
            hsv_hue_shift=11, hsv_sat_shift=20, hsv_val_shift=15,
            r_shift=7, g_shift=3, b_shift=12,
            clahe_clip=3.0, clahe_grid=3, edge_strength=0.5,
        )
        digest = lambda: hashlib.sha256(
            apply_transform_chain(img, params).array.tobytes()
        ).hexdigest()
        serial = {digest(), digest()}
        with ThreadPoolExecutor(max_workers=4) as pool:
            threaded = set(pool.map(lambda _: digest(), range(8)))
        assert serial == threaded and len(serial) == 1

    def test_every_operator_preserves_shape_and_range(self, rng):
        img = random_image(rng, 21, 15)
        for out in (
            hsv_shift(img, 20, 30, 30),
            rgb_shift(img, 20, 20, 20),
            clahe(img, 4.0, 4),
            unsharp_mask(img, 1.0),
        ):
            assert out.array.shape == img.array.shape
            assert out.array.dtype == np.uint8

    def test_params_from_mapping_prefix(self):
        values = {f"grd_{k}": v for k, v in {
            "hsv_hue_shift": 1, "hsv_sat_shift": 2, "hsv_val_shift": 3,
            "r_shift": 4, "g_shift": 5, "b_shift": 6,
            "clahe_clip": 1.5, "clahe_grid": 2, "edge_strength": 0.25,
        }.items()}
        params = TransformParams.from_mapping(values, "grd_")
        assert params.hsv_hue_shift == 1
        assert params.clahe_grid == 2
        assert params.edge_strength == 0.25
