"""Shared golden request/response cases run against the in-package mock server."""
from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np
import pytest
import requests

from segadapt.backends.mock_server import MockModelServer
from segadapt.core_types import decode_mask_png

SHARED_DIR = Path(__file__).parent.parent / "conformance" / "shared"
CASES = sorted(SHARED_DIR.glob("*.json"))


@pytest.fixture(scope="module")
def server():
    with MockModelServer() as srv:
        yield srv


def check_response(expect: dict, status: int, payload: dict) -> None:
    assert status == expect["status"]
    if "error_code" in expect:
        assert payload["error"]["code"] == expect["error_code"]
    if "bbox" in expect:
        assert payload["bbox"] == expect["bbox"]
    if "mask_png" in expect:
        got = decode_mask_png(base64.b64decode(payload["mask"]))
        want = decode_mask_png(base64.b64decode(expect["mask_png"]))
        assert np.array_equal(got.array, want.array)
    if "probs" in expect:
        assert payload["probs"] == pytest.approx(expect["probs"], abs=1e-6)
    if "probs_sum" in expect:
        assert sum(payload["probs"]) == pytest.approx(expect["probs_sum"], abs=1e-6)
    if "scores" in expect:
        assert payload["scores"] == pytest.approx(expect["scores"], abs=1e-6)
    if "features" in expect:
        want = expect["features"]
        assert (payload["h"], payload["w"], payload["d"]) == (want["h"], want["w"], want["d"])
        got = np.frombuffer(base64.b64decode(payload["data"]), dtype="<f4")
        assert got == pytest.approx(want["data"], abs=1e-6)


@pytest.mark.parametrize("case_path", CASES, ids=lambda p: p.stem)
def test_shared_golden_case(server, case_path):
    case = json.loads(case_path.read_text())
    resp = requests.post(
        server.base_url + case["endpoint"], json=case["request"], timeout=30
    )
    try:
        payload = resp.json()
    except ValueError:
        payload = {}
    check_response(case["expect"], resp.status_code, payload)


def test_shared_suite_is_nonempty():
    assert len(CASES) >= 8
