"""HTTP client for the model-server wire protocol.

All endpoints are POST with JSON bodies; images travel as base64 PNG.
Numerically sloppy responses (probabilities not summing to one, scores
outside [0, 1], boxes past the image edge) are repaired with a warning;
structural violations raise ProtocolError.
"""
from __future__ import annotations

import base64
import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np
import requests

from ..core_types import (
    BBox,
    BinaryMask,
    ImageRgb8,
    Point2D,
    decode_mask_png,
    encode_image_png,
)
from ..errors import BackendUnavailable, DecodeError, NoDetection, ProtocolError
from ..prompt_boost import FeatureMap
from .interfaces import Backends

logger = logging.getLogger(__name__)

NO_DETECTION_CODE = "no_detection"


@dataclass(frozen=True)
class BackendEndpoints:
    """Connection settings for a model server."""

    base_url: str
    timeout: float = 120.0
    retries: int = 2
    pool_size: int = 8

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.retries < 0:
            raise ValueError("retries must be >= 0")


class WireClient:
    """Thread-safe JSON-over-HTTP client with bounded pooling and retries."""

    def __init__(self, endpoints: BackendEndpoints):
        self.endpoints = endpoints
        self.session = requests.Session()
        adapter = requests.adapters.HTTPAdapter(
            pool_connections=endpoints.pool_size,
            pool_maxsize=endpoints.pool_size,
        )
        self.session.mount("http://", adapter)
        self.session.mount("https://", adapter)

    def post(self, endpoint: str, body: dict[str, Any]) -> dict[str, Any]:
        url = self.endpoints.base_url.rstrip("/") + endpoint
        last_exc: Exception | None = None
        for _ in range(self.endpoints.retries + 1):
            try:
                resp = self.session.post(url, json=body, timeout=self.endpoints.timeout)
            except requests.RequestException as exc:
                last_exc = exc
                continue
            return self._handle(resp)
        raise BackendUnavailable(f"{url}: {last_exc}") from last_exc

    def _handle(self, resp: requests.Response) -> dict[str, Any]:
        if resp.status_code >= 400:
            code, message = "", resp.text[:200]
            try:
                err = resp.json().get("error", {})
                code = err.get("code", "")
                message = err.get("message", message)
            except ValueError:
                pass
            if code == NO_DETECTION_CODE:
                raise NoDetection(message)
            if 400 <= resp.status_code < 500:
                raise ProtocolError(f"HTTP {resp.status_code}: {code} {message}")
            raise BackendUnavailable(f"HTTP {resp.status_code}: {code} {message}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolError(f"non-JSON response: {exc}") from exc
        if not isinstance(payload, dict):
            raise ProtocolError("response body must be a JSON object")
        return payload


def _b64_image(image: ImageRgb8) -> str:
    return base64.b64encode(encode_image_png(image)).decode("ascii")


class WireGroundingBackend:
    def __init__(self, client: WireClient):
        self.client = client

    def ground(self, image: ImageRgb8, sentence: str) -> BBox:
        if not sentence:
            raise ValueError("sentence must be non-empty")
        payload = self.client.post("/v1/ground", {"image": _b64_image(image), "sentence": sentence})
        bbox = payload.get("bbox")
        if not isinstance(bbox, list) or len(bbox) != 4:
            raise ProtocolError(f"malformed bbox {bbox!r}")
        x0, y0, x1, y1 = (int(v) for v in bbox)
        try:
            box = BBox(x0, y0, x1, y1)
        except ValueError as exc:
            raise ProtocolError(f"degenerate bbox {bbox!r}") from exc
        if box.x_max > image.width or box.y_max > image.height or box.x_min < 0 or box.y_min < 0:
            logger.warning("server bbox %s exceeds image bounds; clamping", bbox)
            box = box.clamped(image.width, image.height)
        return box


class WireSegmentationBackend:
    def __init__(self, client: WireClient):
        self.client = client

    def segment(self, image: ImageRgb8, box: BBox, points: Sequence[Point2D]) -> BinaryMask:
        payload = self.client.post(
            "/v1/segment",
            {
                "image": _b64_image(image),
                "bbox": [box.x_min, box.y_min, box.x_max, box.y_max],
                "points": [[p.x, p.y] for p in points],
            },
        )
        encoded = payload.get("mask")
        if not isinstance(encoded, str):
            raise ProtocolError("missing mask payload")
        try:
            mask = decode_mask_png(base64.b64decode(encoded))
        except (DecodeError, ValueError) as exc:
            raise ProtocolError(f"undecodable mask: {exc}") from exc
        if mask.width != image.width or mask.height != image.height:
            raise ProtocolError(
                f"mask {mask.width}x{mask.height} does not match image "
                f"{image.width}x{image.height}"
            )
        return mask


class WireFeatureBackend:
    def __init__(self, client: WireClient):
        self.client = client

    def features(self, image: ImageRgb8) -> FeatureMap:
        payload = self.client.post("/v1/features", {"image": _b64_image(image)})
        try:
            h, w, d = int(payload["h"]), int(payload["w"]), int(payload["d"])
            raw = base64.b64decode(payload["data"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed features payload: {exc}") from exc
        values = np.frombuffer(raw, dtype="<f4")
        if values.size != h * w * d:
            raise ProtocolError(
                f"feature data holds {values.size} floats, expected {h * w * d}"
            )
        grid = values.astype(np.float64).reshape(h, w, d)
        return FeatureMap(grid, image_width=image.width, image_height=image.height)


class WireScoringBackend:
    def __init__(self, client: WireClient):
        self.client = client

    def classify(self, image: ImageRgb8, labels: Sequence[str]) -> list[float]:
        if not labels:
            raise ValueError("labels must be non-empty")
        payload = self.client.post(
            "/v1/classify", {"image": _b64_image(image), "labels": list(labels)}
        )
        probs = payload.get("probs")
        if not isinstance(probs, list) or len(probs) != len(labels):
            raise ProtocolError(f"expected {len(labels)} probabilities, got {probs!r}")
        arr = np.array([float(p) for p in probs], dtype=np.float64)
        if (arr < 0).any():
            logger.warning("negative probabilities from server; clamping to 0")
            arr = np.maximum(arr, 0.0)
        total = arr.sum()
        if abs(total - 1.0) > 1e-6:
            logger.warning("probabilities sum to %.6f; renormalizing", total)
            arr = arr / total if total > 0 else np.full(len(arr), 1.0 / len(arr))
        return [float(p) for p in arr]

    def match_texts(self, image: ImageRgb8, texts: Sequence[str]) -> list[float]:
        if not texts:
            raise ValueError("texts must be non-empty")
        payload = self.client.post(
            "/v1/match", {"image": _b64_image(image), "texts": list(texts)}
        )
        scores = payload.get("scores")
        if not isinstance(scores, list) or len(scores) != len(texts):
            raise ProtocolError(f"expected {len(texts)} scores, got {scores!r}")
        arr = np.array([float(s) for s in scores], dtype=np.float64)
        if (arr < 0).any() or (arr > 1).any():
            logger.warning("similarities outside [0, 1] from server; clamping")
            arr = arr.clip(0.0, 1.0)
        return [float(s) for s in arr]


def wire_backends(endpoints: BackendEndpoints) -> Backends:
    client = WireClient(endpoints)
    return Backends(
        grounding=WireGroundingBackend(client),
        segmentation=WireSegmentationBackend(client),
        features=WireFeatureBackend(client),
        scoring=WireScoringBackend(client),
    )
