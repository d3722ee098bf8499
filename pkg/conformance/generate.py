#!/usr/bin/env python3
"""Regenerate the golden conformance cases from the mock world definitions."""
from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from segadapt.backends.mock import MockWorldSpec, mock_backends
from segadapt.backends.mock_server import handle_request
from segadapt.core_types import ImageRgb8, encode_image_png

ROOT = Path(__file__).parent


def b64_image(gray: np.ndarray) -> str:
    img = ImageRgb8(np.repeat(gray.astype(np.uint8)[:, :, None], 3, axis=2))
    return base64.b64encode(encode_image_png(img)).decode("ascii")


def write(group: str, case: dict) -> None:
    out = ROOT / group
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{case['name']}.json"
    path.write_text(json.dumps(case, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


def reply(endpoint: str, body: dict) -> dict:
    return handle_request(endpoint, body, mock_backends(MockWorldSpec()))


def shared_cases() -> None:
    # grounding: one bright square on dark field
    gray = np.full((24, 24), 40)
    gray[6:12, 4:14] = 230
    body = {"image": b64_image(gray), "sentence": "bright block"}
    write("shared", {
        "name": "ground_square",
        "endpoint": "/v1/ground",
        "request": body,
        "expect": {"status": 200, "bbox": reply("/v1/ground", body)["bbox"]},
    })

    # grounding: everything below threshold
    body = {"image": b64_image(np.full((16, 16), 120)), "sentence": "anything"}
    write("shared", {
        "name": "ground_no_detection",
        "endpoint": "/v1/ground",
        "request": body,
        "expect": {"status": 422, "error_code": "no_detection"},
    })

    # segmentation: two-level interior, Otsu keeps the bright center blob
    gray = np.full((20, 20), 50)
    gray[7:14, 7:14] = 210
    body = {"image": b64_image(gray), "bbox": [3, 3, 17, 17], "points": []}
    write("shared", {
        "name": "segment_otsu",
        "endpoint": "/v1/segment",
        "request": body,
        "expect": {"status": 200, "mask_png": reply("/v1/segment", body)["mask"]},
    })

    # segmentation: zero-variance interior fills the whole box
    body = {"image": b64_image(np.full((12, 12), 77)), "bbox": [2, 4, 9, 10], "points": []}
    write("shared", {
        "name": "segment_degenerate",
        "endpoint": "/v1/segment",
        "request": body,
        "expect": {"status": 200, "mask_png": reply("/v1/segment", body)["mask"]},
    })

    # features: constant image
    body = {"image": b64_image(np.full((16, 16), 144))}
    out = reply("/v1/features", body)
    data = np.frombuffer(base64.b64decode(out["data"]), dtype="<f4")
    write("shared", {
        "name": "features_constant",
        "endpoint": "/v1/features",
        "request": body,
        "expect": {
            "status": 200,
            "features": {"h": out["h"], "w": out["w"], "d": out["d"],
                         "data": [float(v) for v in data]},
        },
    })

    # features: gradient image, ragged grid
    gradient = np.tile(np.arange(20) * 12, (12, 1)).clip(0, 255)
    body = {"image": b64_image(gradient)}
    out = reply("/v1/features", body)
    data = np.frombuffer(base64.b64decode(out["data"]), dtype="<f4")
    write("shared", {
        "name": "features_gradient",
        "endpoint": "/v1/features",
        "request": body,
        "expect": {
            "status": 200,
            "features": {"h": out["h"], "w": out["w"], "d": out["d"],
                         "data": [float(v) for v in data]},
        },
    })

    # classify: half target band, half background band
    gray = np.zeros((10, 10))
    gray[:5] = 140
    gray[5:] = 110
    body = {"image": b64_image(gray), "labels": ["lesion", "background", "dark spot"]}
    write("shared", {
        "name": "classify_bands",
        "endpoint": "/v1/classify",
        "request": body,
        "expect": {"status": 200, "probs": reply("/v1/classify", body)["probs"], "probs_sum": 1.0},
    })

    body = {"image": b64_image(np.full((6, 6), 140)), "labels": ["lesion"]}
    write("shared", {
        "name": "classify_single_label",
        "endpoint": "/v1/classify",
        "request": body,
        "expect": {"status": 200, "probs": [1.0], "probs_sum": 1.0},
    })

    # match: 40% of non-black pixels inside the target band
    gray = np.zeros((10, 10))
    gray[:4] = 140
    gray[4:] = 60
    body = {"image": b64_image(gray), "texts": ["a", "b", "c"]}
    write("shared", {
        "name": "match_band_fraction",
        "endpoint": "/v1/match",
        "request": body,
        "expect": {"status": 200, "scores": reply("/v1/match", body)["scores"]},
    })

    body = {"image": b64_image(np.zeros((8, 8))), "texts": ["x"]}
    write("shared", {
        "name": "match_all_black",
        "endpoint": "/v1/match",
        "request": body,
        "expect": {"status": 200, "scores": [0.0]},
    })


def adapter_cases() -> None:
    # raw (unnormalized) stub scorer output must be normalized to a simplex
    gray = np.zeros((10, 10))
    gray[:5] = 140
    gray[5:] = 110
    body = {"image": b64_image(gray), "labels": ["lesion", "background", "dark spot"]}
    # stub-raw classify returns plain band fractions [0.5, 0.5, 0.0]
    write("adapter", {
        "name": "classify_renormalize",
        "endpoint": "/v1/classify",
        "models": {"scoring_model_id": "stub-raw"},
        "request": body,
        "expect": {"status": 200, "probs": [0.5, 0.5, 0.0], "probs_sum": 1.0},
    })

    # stub-raw match emits band fraction scaled by 1.5; service clamps to [0, 1]
    gray = np.zeros((10, 10))
    gray[:8] = 140
    gray[8:] = 60
    body = {"image": b64_image(gray), "texts": ["a", "b"]}
    write("adapter", {
        "name": "match_clamp",
        "endpoint": "/v1/match",
        "models": {"scoring_model_id": "stub-raw"},
        "request": body,
        "expect": {"status": 200, "scores": [1.0, 1.0]},
    })

    # text-coordinate grounding model output parsed to a pixel box:
    # per-mille coordinates [[250,125,750,500]] on a 40x32 image
    gray = np.full((32, 40), 40)
    gray[4:16, 10:30] = 230
    body = {"image": b64_image(gray), "sentence": "block"}
    write("adapter", {
        "name": "ground_text_parse",
        "endpoint": "/v1/ground",
        "models": {"grounding_model_id": "stub-text"},
        "request": body,
        "expect": {"status": 200, "bbox": [10, 4, 30, 16]},
    })


if __name__ == "__main__":
    shared_cases()
    adapter_cases()
