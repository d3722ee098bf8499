"""Report artifacts: SVG figures rendered with matplotlib plus the underlying CSVs."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from ..search_space import Trial
from .evaluate import EvalReport

TRIALS_CSV_HEADER = ["trial_id", "objective", "best_so_far"]
SCATTER_CSV_HEADER = ["sample_id", "s_val", "s_val_norm", "dice", "status"]


def _normalize(values: Sequence[float]) -> list[float]:
    if not values:
        return []
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def emit_plots(report: EvalReport, trials: Sequence[Trial], out_dir: str | Path) -> list[Path]:
    """Write the score/Dice scatter and the optimization curves.

    Produces scatter_sval_dice.{svg,csv}, bo_best.svg, bo_trace.svg and
    trials.csv (columns trial_id,objective,best_so_far). Empty trial lists
    leave header-only CSVs and empty axes.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    svals = [e.s_val for e in report.per_sample]
    dices = [e.dice for e in report.per_sample]
    norms = _normalize(svals)

    scatter_csv = out_dir / "scatter_sval_dice.csv"
    with open(scatter_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCATTER_CSV_HEADER)
        for entry, norm in zip(report.per_sample, norms):
            writer.writerow([entry.id, repr(entry.s_val), repr(norm), repr(entry.dice), entry.status])
    written.append(scatter_csv)

    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(norms, dices, s=18, alpha=0.75, edgecolors="none")
    ax.set_xlabel("normalized validation score")
    ax.set_ylabel("Dice")
    title = "validation score vs Dice"
    if report.pearson_r is not None:
        title += f" (r={report.pearson_r:.2f})"
    ax.set_title(title)
    fig.tight_layout()
    scatter_svg = out_dir / "scatter_sval_dice.svg"
    fig.savefig(scatter_svg)
    plt.close(fig)
    written.append(scatter_svg)

    best_so_far: list[float] = []
    best = float("-inf")
    for trial in trials:
        best = max(best, trial.objective)
        best_so_far.append(best)

    trials_csv = out_dir / "trials.csv"
    with open(trials_csv, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_CSV_HEADER)
        for trial, cummax in zip(trials, best_so_far):
            writer.writerow([trial.id, repr(trial.objective), repr(cummax)])
    written.append(trials_csv)

    ids = [t.id for t in trials]
    fig, ax = plt.subplots(figsize=(5, 4))
    if ids:
        ax.step(ids, best_so_far, where="post")
    ax.set_xlabel("trial")
    ax.set_ylabel("best objective so far")
    ax.set_title("optimization progress")
    fig.tight_layout()
    best_svg = out_dir / "bo_best.svg"
    fig.savefig(best_svg)
    plt.close(fig)
    written.append(best_svg)

    fig, ax = plt.subplots(figsize=(5, 4))
    if ids:
        ax.plot(ids, [t.objective for t in trials], marker="o", markersize=2.5, linewidth=0.8)
    ax.set_xlabel("trial")
    ax.set_ylabel("objective")
    ax.set_title("per-trial objective")
    fig.tight_layout()
    trace_svg = out_dir / "bo_trace.svg"
    fig.savefig(trace_svg)
    plt.close(fig)
    written.append(trace_svg)

    return written
