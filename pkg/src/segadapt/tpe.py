"""Mixed-type Tree-structured Parzen Estimator with an ask/tell interface.

The sampler splits observed trials into a good set (top gamma quantile by
objective) and a bad set, fits per-parameter density estimators l and g,
draws candidates from l and keeps the candidate maximizing
sum(log l - log g). Numeric parameters use truncated Gaussian kernel
density estimates (integers are rounded on sampling and their density is
evaluated on the rounded lattice); categoricals use smoothed frequencies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import EmptySpace, InvalidConfig, NoTrials, NonFiniteObjective
from .search_space import (
    CATEGORICAL,
    FLOAT,
    INTEGER,
    Configuration,
    ParamSpec,
    SearchSpace,
    Trial,
    sample_uniform,
)

_LOG_FLOOR = 1e-300


@dataclass(frozen=True)
class TpeSettings:
    """Sampler knobs; defaults follow common TPE practice."""

    n_startup: int = 10
    gamma: float = 0.25
    n_candidates: int = 24
    seed: int = 0
    bandwidth_floor_fraction: float = 0.01
    categorical_prior_weight: float = 1.0

    def __post_init__(self) -> None:
        if self.n_startup < 1:
            raise ValueError("n_startup must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if self.n_candidates < 1:
            raise ValueError("n_candidates must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


class _NumericEstimator:
    """Truncated Gaussian KDE over [lo, hi] with one uniform prior pseudo-component.

    The prior component (weight of a single observation, in both the good
    and the bad estimator) keeps every region sampleable; without it the
    sampler collapses onto the first incumbent. Kernel bandwidths are
    per-point neighbor gaps clipped to [range / (n + 1), range] (never
    below floor_fraction * range): the more points an estimator holds, the
    sharper its kernels may get, so an over-exploited cluster eventually
    scores higher under the bad density than under the good one and the
    ratio pushes candidates back to unexplored regions. An empty
    observation set degenerates to the pure uniform distribution.
    """

    def __init__(self, points: Sequence[float], spec: ParamSpec, floor_fraction: float):
        self.lo, self.hi = float(spec.bounds[0]), float(spec.bounds[1])
        self.integer = spec.kind == INTEGER
        self.span = self.hi - self.lo
        self.mu = np.asarray(points, dtype=np.float64)
        self.n_components = self.mu.size + 1
        if self.mu.size == 0 or self.span == 0.0:
            self.bw = None
            return
        self.bw = self._neighbor_bandwidths(floor_fraction)
        lo_z = (self.lo - self.mu) / self.bw
        hi_z = (self.hi - self.mu) / self.bw
        self.cdf_lo = ndtr(lo_z)
        self.cdf_hi = ndtr(hi_z)
        self.z_norm = np.maximum(self.cdf_hi - self.cdf_lo, _LOG_FLOOR)

    def _neighbor_bandwidths(self, floor_fraction: float) -> np.ndarray:
        n = self.mu.size
        if n == 1:
            gaps = np.array([self.span])
        else:
            order = np.argsort(self.mu, kind="stable")
            srt = self.mu[order]
            left = np.empty(n)
            right = np.empty(n)
            left[1:] = srt[1:] - srt[:-1]
            right[:-1] = srt[1:] - srt[:-1]
            left[0] = right[0]
            right[-1] = left[-1]
            gaps = np.empty(n)
            gaps[order] = np.maximum(left, right)
        bw_min = max(self.span / min(100.0, n + 1.0), floor_fraction * self.span)
        return np.clip(gaps, bw_min, self.span)

    def _sample_uniform(self, u: np.ndarray) -> np.ndarray:
        # Lattice-uniform for integers so sampling matches _uniform_mass.
        if self.integer:
            return np.minimum(np.floor(u * (self.span + 1.0)), self.span) + self.lo
        return self.lo + u * self.span

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.span == 0.0:
            return np.full(size, self.lo)
        u = rng.uniform(0.0, 1.0, size=size)
        if self.bw is None:
            return self._sample_uniform(u)
        idx = rng.integers(0, self.n_components, size=size)
        comp = np.minimum(idx, self.mu.size - 1)
        span_u = self.cdf_lo[comp] + u * (self.cdf_hi[comp] - self.cdf_lo[comp])
        xs_kernel = self.mu[comp] + self.bw[comp] * ndtri(np.clip(span_u, 1e-15, 1 - 1e-15))
        xs = np.where(idx < self.mu.size, xs_kernel, self._sample_uniform(u))
        xs = np.clip(xs, self.lo, self.hi)
        if self.integer:
            xs = np.clip(np.rint(xs), self.lo, self.hi)
        return xs

    def _trunc_cdf(self, x: np.ndarray) -> np.ndarray:
        # Per-component truncated CDF, summed over kernel components.
        z = (x[:, None] - self.mu[None, :]) / self.bw
        val = (ndtr(z) - self.cdf_lo[None, :]) / self.z_norm[None, :]
        return np.clip(val, 0.0, 1.0).sum(axis=1)

    def _uniform_mass(self, xs: np.ndarray) -> np.ndarray:
        if self.integer:
            return np.full(len(xs), 1.0 / (self.span + 1.0))
        return np.full(len(xs), 1.0 / self.span)

    def log_density(self, xs: np.ndarray) -> np.ndarray:
        if self.span == 0.0:
            return np.zeros(len(xs))
        if self.bw is None:
            return np.log(self._uniform_mass(xs))
        if self.integer:
            cell_hi = np.minimum(xs + 0.5, self.hi)
            cell_lo = np.maximum(xs - 0.5, self.lo)
            mass = self._trunc_cdf(cell_hi) - self._trunc_cdf(cell_lo)
        else:
            z = (xs[:, None] - self.mu[None, :]) / self.bw
            pdf = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * self.bw)
            mass = (pdf / self.z_norm[None, :]).sum(axis=1)
        density = (mass + self._uniform_mass(xs)) / self.n_components
        return np.log(np.maximum(density, _LOG_FLOOR))


class _CategoricalEstimator:
    """Smoothed frequency distribution: p(choice) ~ count + prior weight."""

    def __init__(self, indices: Sequence[int], n_choices: int, prior_weight: float):
        counts = np.bincount(np.asarray(indices, dtype=np.int64), minlength=n_choices)
        weights = counts + prior_weight
        self.probs = weights / weights.sum()

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.choice(len(self.probs), size=size, p=self.probs)

    def log_density(self, xs: np.ndarray) -> np.ndarray:
        return np.log(np.maximum(self.probs[xs.astype(np.int64)], _LOG_FLOOR))


def _make_estimator(values, spec: ParamSpec, settings: TpeSettings):
    if spec.kind == CATEGORICAL:
        return _CategoricalEstimator(values, len(spec.choices), settings.categorical_prior_weight)
    return _NumericEstimator(values, spec, settings.bandwidth_floor_fraction)


@dataclass
class TpeOptimizer:
    """Sequential maximizer over a SearchSpace.

    Suggestions are a pure function of (settings, observed history): each
    call derives its random stream from the seed and the history length,
    so runs replayed from a trial log continue identically.
    """

    space: SearchSpace
    settings: TpeSettings = field(default_factory=TpeSettings)
    history: list[Trial] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.space.params:
            raise EmptySpace("search space has no parameters")

    def _rng(self, call_index: int) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.settings.seed, spawn_key=(call_index,))
        return np.random.Generator(np.random.PCG64(seq))

    def _split(self) -> tuple[list[Trial], list[Trial]]:
        ordered = sorted(self.history, key=lambda t: (-t.objective, t.id))
        n_good = math.ceil(self.settings.gamma * len(ordered))
        return ordered[:n_good], ordered[n_good:]

    def suggest(self) -> Configuration:
        rng = self._rng(len(self.history))
        if len(self.history) < self.settings.n_startup:
            return sample_uniform(self.space, rng)

        good, bad = self._split()
        n_cand = self.settings.n_candidates
        scores = np.zeros(n_cand)
        columns: dict[str, np.ndarray] = {}
        for spec in self.space.params:
            good_vals = [t.config[spec.name] for t in good]
            bad_vals = [t.config[spec.name] for t in bad]
            l_est = _make_estimator(good_vals, spec, self.settings)
            g_est = _make_estimator(bad_vals, spec, self.settings)
            xs = l_est.sample(rng, n_cand)
            scores += l_est.log_density(xs) - g_est.log_density(xs)
            columns[spec.name] = xs

        best = int(np.argmax(scores))
        values = {}
        for spec in self.space.params:
            x = columns[spec.name][best]
            values[spec.name] = float(x) if spec.kind == FLOAT else int(x)
        config = Configuration(values=values)
        self.space.validate(config)
        return config

    def observe(self, trial: Trial) -> None:
        self.space.validate(trial.config)
        if not math.isfinite(trial.objective):
            raise NonFiniteObjective(f"trial {trial.id} objective {trial.objective}")
        if self.history and trial.id <= self.history[-1].id:
            raise InvalidConfig(
                f"trial id {trial.id} not greater than last observed {self.history[-1].id}"
            )
        self.history.append(trial)

    def best(self) -> Trial:
        if not self.history:
            raise NoTrials("no observed trials")
        return max(self.history, key=lambda t: (t.objective, -t.id))

    @classmethod
    def replay(
        cls, space: SearchSpace, settings: TpeSettings, trials: Iterable[Trial]
    ) -> "TpeOptimizer":
        """Rebuild an optimizer from a trial log to resume a run."""
        opt = cls(space=space, settings=settings)
        for trial in trials:
            opt.observe(trial)
        return opt
