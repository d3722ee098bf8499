"""Dice evaluation of pipeline results against ground-truth masks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..core_types import BinaryMask
from ..errors import DimensionMismatch, MissingTruth
from ..pipeline import STATUS_OK, SampleResult
from ..search_space import Configuration


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """Overlap score 2|A n B| / (|A| + |B|); two empty masks count as 1.0."""
    if (a.height, a.width) != (b.height, b.width):
        raise DimensionMismatch(
            f"mask {a.width}x{a.height} vs mask {b.width}x{b.height}"
        )
    total = a.area + b.area
    if total == 0:
        return 1.0
    intersection = int((a.array & b.array).sum())
    return 2.0 * intersection / total


@dataclass(frozen=True)
class SampleEval:
    id: str
    dice: float
    s_val: float
    status: str


@dataclass(frozen=True)
class EvalReport:
    """Per-sample and aggregate scores for one configuration.

    Means run over all samples; failed samples contribute a Dice and score
    of zero so configurations that cannot ground are penalized rather than
    skipped.
    """

    per_sample: tuple[SampleEval, ...]
    mean_dice: float
    mean_s_val: float
    pearson_r: float | None
    config: Configuration

    def to_json_dict(self) -> dict:
        return {
            "mean_dice": self.mean_dice,
            "mean_s_val": self.mean_s_val,
            "pearson_r": self.pearson_r,
            "config": dict(self.config.values),
            "per_sample": [
                {"id": e.id, "dice": e.dice, "s_val": e.s_val, "status": e.status}
                for e in self.per_sample
            ],
        }


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Pearson correlation, or None when undefined (short or constant input)."""
    if len(xs) < 3:
        return None
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if x.std() == 0.0 or y.std() == 0.0:
        return None
    return float(np.corrcoef(x, y)[0, 1])


def evaluate(
    results: Sequence[SampleResult],
    truths: Mapping[str, BinaryMask],
    config: Configuration,
) -> EvalReport:
    """Score results against ground truth; failed samples score Dice 0."""
    rows = []
    for result in results:
        if result.status == STATUS_OK:
            if result.sample_id not in truths:
                raise MissingTruth(f"no ground-truth mask for sample {result.sample_id!r}")
            value = dice(result.mask, truths[result.sample_id])
        else:
            value = 0.0
        rows.append(
            SampleEval(
                id=result.sample_id,
                dice=value,
                s_val=result.score.s_val,
                status=result.status,
            )
        )
    ok_rows = [r for r in rows if r.status == STATUS_OK]
    return EvalReport(
        per_sample=tuple(rows),
        mean_dice=float(np.mean([r.dice for r in rows])) if rows else 0.0,
        mean_s_val=float(np.mean([r.s_val for r in rows])) if rows else 0.0,
        pearson_r=pearson([r.s_val for r in ok_rows], [r.dice for r in ok_rows]),
        config=config,
    )
