from .interfaces import (
    Backends,
    FeatureBackend,
    GroundingBackend,
    ScoringBackend,
    SegmentationBackend,
)
from .mock import MockWorldSpec, mock_backends
from .wire import BackendEndpoints, wire_backends

__all__ = [
    "Backends",
    "BackendEndpoints",
    "FeatureBackend",
    "GroundingBackend",
    "MockWorldSpec",
    "ScoringBackend",
    "SegmentationBackend",
    "mock_backends",
    "wire_backends",
]
