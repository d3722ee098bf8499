"""End-to-end orchestration: per-sample segmentation, batch adaptation, inference.

A trial evaluates one configuration over the adaptation subset; the
optimizer is strictly sequential across trials while per-sample work inside
a trial may fan out over a thread pool (results merge in sample order, so
parallel equals serial).
"""
from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .backends.interfaces import Backends
from .core_types import BBox, BinaryMask, ImageRgb8, Point2D, TaskDefinition
from .errors import AdaptationError, BackendUnavailable, NoDetection, ProtocolError
from .image_ops import TransformParams, apply_transform_chain
from .prompt_boost import boost
from .search_space import (
    BOOST_POINTS,
    GROUNDING_PREFIX,
    PROMPT_ID,
    SEGMENTATION_PREFIX,
    Configuration,
    SearchSpace,
    Trial,
    default_space,
)
from .tpe import TpeOptimizer, TpeSettings
from .validator import ValidationScore, validate

STATUS_OK = "ok"
STATUS_GROUNDING_FAILED = "grounding_failed"
STATUS_BACKEND_ERROR = "backend_error"

MODE_BATCH = "batch"
MODE_PER_SAMPLE = "per_sample"


@dataclass(frozen=True)
class AdaptationSettings:
    """Budget and mode of the adaptation loop."""

    n_trials: int = 100
    subset_size: int = 100
    subset_seed: int = 0
    mode: str = MODE_BATCH
    workers: int = 1

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.subset_size < 1:
            raise ValueError("subset_size must be >= 1")
        if self.mode not in (MODE_BATCH, MODE_PER_SAMPLE):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True, eq=False)
class SampleResult:
    """Per-sample pipeline output and intermediates."""

    sample_id: str
    status: str
    score: ValidationScore
    mask: BinaryMask | None = None
    bbox: BBox | None = None
    points: tuple[Point2D, ...] = ()

    def __post_init__(self) -> None:
        if (self.status == STATUS_OK) != (self.mask is not None):
            raise ValueError("mask must be present exactly when status is ok")


@dataclass(frozen=True)
class AdaptationResult:
    """Adaptation outcome: the solved configuration plus the full trial log.

    per_sample_configs is populated in per-sample mode and maps sample ids
    to the configuration solved for that sample alone.
    """

    best_config: Configuration
    trials: tuple[Trial, ...]
    per_sample_configs: dict[str, Configuration] = field(default_factory=dict)


def segment_one(
    image: ImageRgb8,
    task: TaskDefinition,
    config: Configuration,
    backends: Backends,
    sample_id: str = "",
) -> SampleResult:
    """Run the grounding -> boosting -> segmentation -> scoring chain once.

    Grounding and segmentation see their own transformed inputs; the
    quality score is computed against the untransformed image. A failed
    grounding yields the floor score rather than an exception.
    """
    grd_params = TransformParams.from_mapping(config.values, GROUNDING_PREFIX)
    seg_params = TransformParams.from_mapping(config.values, SEGMENTATION_PREFIX)
    sentence = task.grounding_sentences[int(config[PROMPT_ID])]

    try:
        grd_image = apply_transform_chain(image, grd_params)
        try:
            box = backends.grounding.ground(grd_image, sentence)
        except NoDetection:
            return SampleResult(
                sample_id=sample_id,
                status=STATUS_GROUNDING_FAILED,
                score=ValidationScore.floor(),
            )
        points = boost(grd_image, box, int(config[BOOST_POINTS]), backends.features)
        seg_image = apply_transform_chain(image, seg_params)
        mask = backends.segmentation.segment(seg_image, box, points)
        score = validate(image, mask, task, backends.scoring)
    except (BackendUnavailable, ProtocolError):
        return SampleResult(
            sample_id=sample_id,
            status=STATUS_BACKEND_ERROR,
            score=ValidationScore.floor(),
        )
    return SampleResult(
        sample_id=sample_id,
        status=STATUS_OK,
        score=score,
        mask=mask,
        bbox=box,
        points=tuple(points),
    )


def _evaluate_many(
    samples: Sequence[tuple[str, ImageRgb8]],
    task: TaskDefinition,
    config: Configuration,
    backends: Backends,
    workers: int,
) -> list[SampleResult]:
    if workers <= 1 or len(samples) <= 1:
        return [
            segment_one(img, task, config, backends, sample_id=sid) for sid, img in samples
        ]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(segment_one, img, task, config, backends, sid)
            for sid, img in samples
        ]
        return [f.result() for f in futures]


def _draw_subset(
    samples: Sequence[tuple[str, ImageRgb8]], settings: AdaptationSettings
) -> list[tuple[str, ImageRgb8]]:
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(settings.subset_seed)))
    size = min(settings.subset_size, len(samples))
    idx = sorted(rng.choice(len(samples), size=size, replace=False).tolist())
    return [samples[i] for i in idx]


def _run_bo(
    subset: Sequence[tuple[str, ImageRgb8]],
    task: TaskDefinition,
    space: SearchSpace,
    settings: AdaptationSettings,
    backends: Backends,
    seed: int,
) -> tuple[Configuration, list[Trial]]:
    opt = TpeOptimizer(space=space, settings=TpeSettings(seed=seed))
    any_evaluated = False
    for trial_id in range(1, settings.n_trials + 1):
        config = opt.suggest()
        started = time.perf_counter()
        results = _evaluate_many(subset, task, config, backends, settings.workers)
        elapsed = time.perf_counter() - started
        scores = tuple(r.score.s_val for r in results)
        if any(r.status != STATUS_BACKEND_ERROR for r in results):
            any_evaluated = True
        trial = Trial(
            id=trial_id,
            config=config,
            objective=float(np.mean(scores)),
            per_sample_scores=scores,
            wall_time=elapsed,
        )
        opt.observe(trial)
    if not any_evaluated:
        raise AdaptationError("every sample in every trial failed with backend errors")
    return opt.best().config, list(opt.history)


def adapt(
    samples: Sequence[tuple[str, ImageRgb8]],
    task: TaskDefinition,
    settings: AdaptationSettings,
    backends: Backends,
) -> AdaptationResult:
    """Solve for the best configuration on a seeded subset of the samples.

    Batch mode runs one optimizer whose objective is the mean score over
    the subset; per-sample mode runs an independent optimizer per subset
    sample (kept for the robustness comparison; batch is the default).
    """
    if not samples:
        raise ValueError("samples must be non-empty")
    space = default_space(len(task.grounding_sentences))
    subset = _draw_subset(samples, settings)

    if settings.mode == MODE_BATCH:
        best, trials = _run_bo(subset, task, space, settings, backends, settings.subset_seed)
        return AdaptationResult(best_config=best, trials=tuple(trials))

    per_sample: dict[str, Configuration] = {}
    all_trials: list[Trial] = []
    best_overall: tuple[float, Configuration] | None = None
    for i, (sid, img) in enumerate(subset):
        seed = int(
            np.random.SeedSequence(
                entropy=settings.subset_seed, spawn_key=(i,)
            ).generate_state(1)[0]
        )
        best, trials = _run_bo([(sid, img)], task, space, settings, backends, seed)
        per_sample[sid] = best
        all_trials.extend(trials)
        top = max(t.objective for t in trials)
        if best_overall is None or top > best_overall[0]:
            best_overall = (top, best)
    return AdaptationResult(
        best_config=best_overall[1],
        trials=tuple(all_trials),
        per_sample_configs=per_sample,
    )


def run_dataset(
    dataset: Sequence[tuple[str, ImageRgb8]],
    task: TaskDefinition,
    config: Configuration,
    backends: Backends,
    workers: int = 1,
) -> list[SampleResult]:
    """Segment every sample under one configuration; failures are recorded, not raised."""
    return _evaluate_many(dataset, task, config, backends, workers)
