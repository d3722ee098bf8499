"""Tunable-parameter universe and the configuration/trial records of the optimizer.

The default space holds two independent transform blocks (one for the
grounding input, one for the segmentation input), the grounding sentence
index, and the boosted point count.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping

import numpy as np

from .errors import InvalidConfig

FLOAT = "float"
INTEGER = "integer"
CATEGORICAL = "categorical"

TRANSFORM_BLOCK = (
    # (suffix, kind, lo, hi)
    ("hsv_hue_shift", INTEGER, 0, 20),
    ("hsv_sat_shift", INTEGER, 0, 30),
    ("hsv_val_shift", INTEGER, 0, 30),
    ("r_shift", INTEGER, 0, 20),
    ("g_shift", INTEGER, 0, 20),
    ("b_shift", INTEGER, 0, 20),
    ("clahe_clip", FLOAT, 0.0, 4.0),
    ("clahe_grid", INTEGER, 1, 4),
    ("edge_strength", FLOAT, 0.0, 1.0),
)

GROUNDING_PREFIX = "grd_"
SEGMENTATION_PREFIX = "seg_"
PROMPT_ID = "grd_prompt_id"
BOOST_POINTS = "bst_k_points"


@dataclass(frozen=True)
class ParamSpec:
    """One tunable parameter: numeric with bounds or categorical with choices."""

    name: str
    kind: str
    bounds: tuple[float, float] | None = None
    choices: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (FLOAT, INTEGER, CATEGORICAL):
            raise ValueError(f"unknown param kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.choices:
                raise ValueError(f"{self.name}: categorical needs non-empty choices")
        else:
            if self.bounds is None:
                raise ValueError(f"{self.name}: numeric param needs bounds")
            lo, hi = self.bounds
            if self.kind == FLOAT and not lo < hi:
                raise ValueError(f"{self.name}: float bounds need lo < hi")
            if self.kind == INTEGER and not lo <= hi:
                raise ValueError(f"{self.name}: integer bounds need lo <= hi")

    def contains(self, value: Any) -> bool:
        if self.kind == FLOAT:
            return isinstance(value, (int, float)) and not isinstance(value, bool) and \
                self.bounds[0] <= float(value) <= self.bounds[1]
        if self.kind == INTEGER:
            return isinstance(value, (int, np.integer)) and not isinstance(value, bool) and \
                self.bounds[0] <= int(value) <= self.bounds[1]
        return isinstance(value, (int, np.integer)) and 0 <= int(value) < len(self.choices)


@dataclass(frozen=True)
class SearchSpace:
    """Ordered, uniquely named parameter list."""

    params: tuple[ParamSpec, ...]

    def __post_init__(self) -> None:
        names = [p.name for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError("duplicate parameter names in search space")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(p.name for p in self.params)

    def param(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)

    def validate(self, config: "Configuration") -> None:
        """Raise InvalidConfig naming the first offending parameter."""
        for p in self.params:
            if p.name not in config.values:
                raise InvalidConfig(f"missing value for parameter {p.name!r}")
            value = config.values[p.name]
            if not p.contains(value):
                raise InvalidConfig(f"value {value!r} out of bounds for parameter {p.name!r}")
        extra = set(config.values) - set(self.names)
        if extra:
            raise InvalidConfig(f"unknown parameters {sorted(extra)}")


@dataclass(frozen=True)
class Configuration:
    """One point in the search space: flat name -> value map.

    Categorical parameters are stored as choice indices.
    """

    values: Mapping[str, Any]

    def __getitem__(self, name: str) -> Any:
        return self.values[name]

    def to_json(self) -> str:
        return json.dumps(dict(self.values), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Configuration":
        return cls(values=json.loads(text))


@dataclass(frozen=True)
class Trial:
    """One optimizer observation: a configuration and its objective."""

    id: int
    config: Configuration
    objective: float
    per_sample_scores: tuple[float, ...]
    wall_time: float = 0.0

    def __post_init__(self) -> None:
        # Non-finite objectives are rejected by the optimizer's observe().
        if self.per_sample_scores and math.isfinite(self.objective):
            mean = sum(self.per_sample_scores) / len(self.per_sample_scores)
            if not math.isclose(mean, self.objective, rel_tol=0, abs_tol=1e-9):
                raise ValueError(
                    f"trial {self.id}: objective {self.objective} != mean per-sample score {mean}"
                )


def default_space(n_sentences: int) -> SearchSpace:
    """Build the standard space: two transform blocks + prompt index + point count."""
    if n_sentences < 1:
        raise ValueError("n_sentences must be >= 1")
    params: list[ParamSpec] = []
    for prefix in (GROUNDING_PREFIX, SEGMENTATION_PREFIX):
        for suffix, kind, lo, hi in TRANSFORM_BLOCK:
            params.append(ParamSpec(name=prefix + suffix, kind=kind, bounds=(lo, hi)))
    params.append(
        ParamSpec(
            name=PROMPT_ID,
            kind=CATEGORICAL,
            choices=tuple(str(i) for i in range(n_sentences)),
        )
    )
    params.append(ParamSpec(name=BOOST_POINTS, kind=INTEGER, bounds=(0, 5)))
    return SearchSpace(params=tuple(params))


def sample_uniform(space: SearchSpace, rng: np.random.Generator) -> Configuration:
    """Draw each parameter independently and uniformly from its domain."""
    values: dict[str, Any] = {}
    for p in space.params:
        if p.kind == FLOAT:
            values[p.name] = float(rng.uniform(p.bounds[0], p.bounds[1]))
        elif p.kind == INTEGER:
            values[p.name] = int(rng.integers(int(p.bounds[0]), int(p.bounds[1]) + 1))
        else:
            values[p.name] = int(rng.integers(len(p.choices)))
    return Configuration(values=values)


def base_config(space: SearchSpace) -> Configuration:
    """Identity configuration: numeric minima and first categorical choice.

    On the default space this means zero shifts/strengths, clahe_clip 0.0,
    clahe_grid 1, prompt index 0 and no boosted points, so the transform
    chain leaves images untouched.
    """
    values: dict[str, Any] = {}
    for p in space.params:
        if p.kind == FLOAT:
            values[p.name] = float(p.bounds[0])
        elif p.kind == INTEGER:
            values[p.name] = int(p.bounds[0])
        else:
            values[p.name] = 0
    return Configuration(values=values)


def trial_to_json_dict(trial: Trial, **extra: Any) -> dict[str, Any]:
    """Serialize a trial for the JSON-lines log.

    wall_time is intentionally not serialized: logs from identical seeds
    must be byte-identical, and timing is not.
    """
    record: dict[str, Any] = {
        "id": trial.id,
        "config": dict(trial.config.values),
        "objective": trial.objective,
        "per_sample_scores": list(trial.per_sample_scores),
    }
    record.update(extra)
    return record


def trial_from_json_dict(record: Mapping[str, Any]) -> Trial:
    return Trial(
        id=int(record["id"]),
        config=Configuration(values=dict(record["config"])),
        objective=float(record["objective"]),
        per_sample_scores=tuple(float(s) for s in record["per_sample_scores"]),
    )


def write_trial_log(trials: Iterable[Trial], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trial in trials:
            fh.write(json.dumps(trial_to_json_dict(trial), sort_keys=True))
            fh.write("\n")


def read_trial_log(path: str | Path) -> list[Trial]:
    trials = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                trials.append(trial_from_json_dict(json.loads(line)))
    return trials
