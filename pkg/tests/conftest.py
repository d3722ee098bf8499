from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from segadapt import ImageRgb8, MockWorldSpec, generate_synthetic_benchmark, load_task, mock_backends


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(20240817))


@pytest.fixture
def world_spec():
    return MockWorldSpec()


@pytest.fixture
def backends(world_spec):
    return mock_backends(world_spec)


def random_image(rng, height=32, width=32) -> ImageRgb8:
    return ImageRgb8(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


@pytest.fixture(scope="session")
def bench_dir(tmp_path_factory):
    """Small shared synthetic benchmark; session-scoped because generation is seeded."""
    out = tmp_path_factory.mktemp("bench") / "synthetic"
    generate_synthetic_benchmark(12, 7, MockWorldSpec(), out)
    return out


@pytest.fixture(scope="session")
def bench_task(bench_dir):
    return load_task(bench_dir / "task.json")
