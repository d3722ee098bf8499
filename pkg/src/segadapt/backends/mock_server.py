"""Wire-protocol server over the mock backends, for client and conformance tests.

Implements the same endpoints as a real model server so the wire client,
the golden conformance suite, and any external tooling can be exercised
without model weights.
"""
from __future__ import annotations

import base64
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any

import numpy as np

from ..core_types import BBox, Point2D, decode_image_png, encode_mask_png
from ..errors import NoDetection, SegadaptError
from .mock import MockWorldSpec, mock_backends


def handle_request(endpoint: str, body: dict[str, Any], backends) -> dict[str, Any]:
    """Dispatch one protocol request against a Backends bundle."""
    image = decode_image_png(base64.b64decode(body["image"]))
    if endpoint == "/v1/ground":
        box = backends.grounding.ground(image, body["sentence"])
        return {"bbox": [box.x_min, box.y_min, box.x_max, box.y_max]}
    if endpoint == "/v1/segment":
        x0, y0, x1, y1 = body["bbox"]
        points = [Point2D(float(x), float(y)) for x, y in body.get("points", [])]
        mask = backends.segmentation.segment(image, BBox(x0, y0, x1, y1), points)
        return {"mask": base64.b64encode(encode_mask_png(mask)).decode("ascii")}
    if endpoint == "/v1/features":
        fm = backends.features.features(image)
        data = fm.array.astype("<f4").tobytes()
        return {
            "h": fm.height_cells,
            "w": fm.width_cells,
            "d": fm.dim,
            "data": base64.b64encode(data).decode("ascii"),
        }
    if endpoint == "/v1/classify":
        return {"probs": backends.scoring.classify(image, body["labels"])}
    if endpoint == "/v1/match":
        return {"scores": backends.scoring.match_texts(image, body["texts"])}
    raise KeyError(endpoint)


class _Handler(BaseHTTPRequestHandler):
    backends = None

    def log_message(self, fmt, *args):  # silence per-request stderr noise
        pass

    def _send(self, status: int, payload: dict[str, Any]) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self):
        if self.path == "/v1/health":
            self._send(200, {"status": "ok", "models": {"world": "mock"}})
        else:
            self._send(404, {"error": {"code": "not_found", "message": self.path}})

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        try:
            body = json.loads(self.rfile.read(length))
            payload = handle_request(self.path, body, self.backends)
        except NoDetection as exc:
            self._send(422, {"error": {"code": "no_detection", "message": str(exc)}})
            return
        except KeyError as exc:
            self._send(404, {"error": {"code": "not_found", "message": str(exc)}})
            return
        except (SegadaptError, ValueError) as exc:
            self._send(400, {"error": {"code": "bad_request", "message": str(exc)}})
            return
        except Exception as exc:  # pragma: no cover - defensive
            self._send(500, {"error": {"code": "internal", "message": str(exc)}})
            return
        self._send(200, payload)


class MockModelServer:
    """In-process threaded HTTP server exposing the mock world."""

    def __init__(self, spec: MockWorldSpec | None = None, port: int = 0):
        handler = type("BoundHandler", (_Handler,), {"backends": mock_backends(spec)})
        self.httpd = ThreadingHTTPServer(("127.0.0.1", port), handler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self.httpd.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> "MockModelServer":
        self.thread.start()
        return self

    def __exit__(self, *exc_info) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()
        self.thread.join(timeout=5)
