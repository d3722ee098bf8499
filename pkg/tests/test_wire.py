"""Wire client tests against an in-process server plus a misbehaving stub server."""
from __future__ import annotations

import base64
import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from segadapt import BBox, ImageRgb8, Point2D
from segadapt.backends import BackendEndpoints, wire_backends
from segadapt.backends.mock_server import MockModelServer
from segadapt.core_types import encode_mask_png
from segadapt.core_types import BinaryMask
from segadapt.errors import BackendUnavailable, NoDetection, ProtocolError


@pytest.fixture(scope="module")
def mock_server():
    with MockModelServer() as server:
        yield server


def wire(base_url: str, retries: int = 0):
    return wire_backends(BackendEndpoints(base_url=base_url, timeout=10, retries=retries))


def gray_image(gray: np.ndarray) -> ImageRgb8:
    return ImageRgb8(np.repeat(gray.astype(np.uint8)[:, :, None], 3, axis=2))


class TestAgainstMockServer:
    def test_ground_round_trip(self, mock_server, backends):
        gray = np.full((24, 24), 30, dtype=np.uint8)
        gray[5:10, 8:20] = 250
        img = gray_image(gray)
        remote = wire(mock_server.base_url)
        assert remote.grounding.ground(img, "s") == backends.grounding.ground(img, "s")

    def test_ground_no_detection_propagates(self, mock_server):
        img = gray_image(np.full((8, 8), 10, dtype=np.uint8))
        with pytest.raises(NoDetection):
            wire(mock_server.base_url).grounding.ground(img, "s")

    def test_segment_round_trip(self, mock_server, backends):
        gray = np.full((20, 20), 40, dtype=np.uint8)
        gray[4:12, 4:12] = 210
        img = gray_image(gray)
        box = BBox(2, 2, 16, 16)
        points = [Point2D(6.0, 6.0)]
        remote_mask = wire(mock_server.base_url).segmentation.segment(img, box, points)
        local_mask = backends.segmentation.segment(img, box, points)
        assert np.array_equal(remote_mask.array, local_mask.array)

    def test_features_round_trip_bit_identical_through_f32(self, mock_server, backends, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8))
        remote = wire(mock_server.base_url).features.features(img)
        local = backends.features.features(img)
        assert remote.array.shape == local.array.shape
        assert np.array_equal(
            remote.array.astype(np.float32), local.array.astype(np.float32)
        )

    def test_classify_and_match_round_trip(self, mock_server, backends, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(12, 12, 3), dtype=np.uint8))
        remote = wire(mock_server.base_url)
        labels = ["lesion", "background"]
        assert remote.scoring.classify(img, labels) == pytest.approx(
            backends.scoring.classify(img, labels), abs=1e-9
        )
        texts = ["t1", "t2"]
        assert remote.scoring.match_texts(img, texts) == pytest.approx(
            backends.scoring.match_texts(img, texts), abs=1e-9
        )

    def test_health_endpoint(self, mock_server):
        import requests

        resp = requests.get(mock_server.base_url + "/v1/health", timeout=5)
        assert resp.status_code == 200
        assert resp.json()["status"] == "ok"


class _SloppyHandler(BaseHTTPRequestHandler):
    """Server returning protocol-violating but repairable (or fatal) payloads."""

    responses = {}

    def log_message(self, fmt, *args):
        pass

    def do_POST(self):
        length = int(self.headers.get("Content-Length", "0"))
        self.rfile.read(length)
        payload = self.responses[self.path]
        data = json.dumps(payload).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


@pytest.fixture()
def sloppy_server():
    wrong_mask = base64.b64encode(
        encode_mask_png(BinaryMask(np.ones((4, 4), dtype=np.uint8)))
    ).decode()
    handler = type(
        "Handler",
        (_SloppyHandler,),
        {
            "responses": {
                "/v1/ground": {"bbox": [2, 2, 99, 99]},
                "/v1/segment": {"mask": wrong_mask},
                "/v1/classify": {"probs": [0.5, 0.6]},
                "/v1/match": {"scores": [1.4, -0.2]},
            }
        },
    )
    httpd = ThreadingHTTPServer(("127.0.0.1", 0), handler)
    thread = threading.Thread(target=httpd.serve_forever, daemon=True)
    thread.start()
    host, port = httpd.server_address[:2]
    yield f"http://{host}:{port}"
    httpd.shutdown()
    httpd.server_close()
    thread.join(timeout=5)


class TestRepairsAndFailures:
    def test_out_of_bounds_box_clamped_with_warning(self, sloppy_server, caplog, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(10, 10, 3), dtype=np.uint8))
        with caplog.at_level(logging.WARNING):
            box = wire(sloppy_server).grounding.ground(img, "s")
        assert box == BBox(2, 2, 10, 10)
        assert any("clamping" in r.message for r in caplog.records)

    def test_wrong_mask_dimensions_fatal(self, sloppy_server, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(10, 10, 3), dtype=np.uint8))
        with pytest.raises(ProtocolError):
            wire(sloppy_server).segmentation.segment(img, BBox(0, 0, 4, 4), [])

    def test_probs_renormalized_with_warning(self, sloppy_server, caplog, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8))
        with caplog.at_level(logging.WARNING):
            probs = wire(sloppy_server).scoring.classify(img, ["a", "b"])
        assert sum(probs) == pytest.approx(1.0, abs=1e-9)
        assert probs[0] == pytest.approx(0.5 / 1.1)
        assert any("renormalizing" in r.message for r in caplog.records)

    def test_similarities_clamped_with_warning(self, sloppy_server, caplog, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(6, 6, 3), dtype=np.uint8))
        with caplog.at_level(logging.WARNING):
            scores = wire(sloppy_server).scoring.match_texts(img, ["a", "b"])
        assert scores == [1.0, 0.0]
        assert any("clamping" in r.message for r in caplog.records)

    def test_unreachable_server_retries_then_backend_unavailable(self, rng):
        img = ImageRgb8(rng.integers(0, 256, size=(4, 4, 3), dtype=np.uint8))
        remote = wire_backends(
            BackendEndpoints(base_url="http://127.0.0.1:1", timeout=0.5, retries=2)
        )
        with pytest.raises(BackendUnavailable):
            remote.scoring.classify(img, ["a"])
