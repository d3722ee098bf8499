"""Zero-shot segmentation pipeline with label-free test-time adaptation.

The package orchestrates four black-box model backends (grounding,
promptable segmentation, dense features, vision-language scoring) behind a
wire protocol, tunes input-side transform and prompt parameters with a
Tree-structured Parzen Estimator against a label-free quality score, and
ships deterministic mock backends plus a synthetic benchmark for
desk-scale testing.
"""
from .backends import (
    BackendEndpoints,
    Backends,
    MockWorldSpec,
    mock_backends,
    wire_backends,
)
from .core_types import (
    BBox,
    BinaryMask,
    ImageRgb8,
    Point2D,
    TaskDefinition,
    load_image,
    load_task,
)
from .harness import dice, evaluate, generate_synthetic_benchmark, load_manifest
from .image_ops import TransformParams, apply_transform_chain
from .pipeline import (
    AdaptationResult,
    AdaptationSettings,
    SampleResult,
    adapt,
    run_dataset,
    segment_one,
)
from .prompt_boost import FeatureMap, boost
from .search_space import (
    Configuration,
    ParamSpec,
    SearchSpace,
    Trial,
    base_config,
    default_space,
    sample_uniform,
)
from .tpe import TpeOptimizer, TpeSettings
from .validator import ValidationScore, validate

__all__ = [
    "AdaptationResult",
    "AdaptationSettings",
    "BBox",
    "BackendEndpoints",
    "Backends",
    "BinaryMask",
    "Configuration",
    "FeatureMap",
    "ImageRgb8",
    "MockWorldSpec",
    "ParamSpec",
    "Point2D",
    "SampleResult",
    "SearchSpace",
    "TaskDefinition",
    "TpeOptimizer",
    "TpeSettings",
    "TransformParams",
    "Trial",
    "ValidationScore",
    "adapt",
    "apply_transform_chain",
    "base_config",
    "boost",
    "default_space",
    "dice",
    "evaluate",
    "generate_synthetic_benchmark",
    "load_image",
    "load_manifest",
    "load_task",
    "mock_backends",
    "run_dataset",
    "sample_uniform",
    "segment_one",
    "validate",
    "wire_backends",
]
