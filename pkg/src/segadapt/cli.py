"""Command-line interface: benchmark generation, adaptation, inference, evaluation."""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .backends import BackendEndpoints, Backends, MockWorldSpec, mock_backends, wire_backends
from .core_types import load_task, save_mask
from .errors import SegadaptError
from .harness.dataset import load_manifest
from .harness.evaluate import evaluate
from .harness.report import emit_plots
from .harness.synthetic import generate_synthetic_benchmark
from .pipeline import (
    MODE_BATCH,
    MODE_PER_SAMPLE,
    STATUS_OK,
    AdaptationSettings,
    adapt,
    run_dataset,
)
from .search_space import (
    BOOST_POINTS,
    GROUNDING_PREFIX,
    PROMPT_ID,
    SEGMENTATION_PREFIX,
    Configuration,
    base_config,
    default_space,
    sample_uniform,
    read_trial_log,
    trial_to_json_dict,
)

REGIMES = (
    "optimal-optimal",
    "optimal-base",
    "optimal-random",
    "base-optimal",
    "random-optimal",
)


def _make_backends(backend: str) -> Backends:
    if backend == "mock":
        return mock_backends(MockWorldSpec())
    if backend.startswith("http://") or backend.startswith("https://"):
        return wire_backends(BackendEndpoints(base_url=backend))
    raise click.UsageError(f"--backend must be 'mock' or an http(s) URL, got {backend!r}")


def _write_config(config: Configuration, path: Path) -> None:
    path.write_text(json.dumps(dict(config.values), sort_keys=True, indent=2) + "\n")


def _read_config(path: Path) -> Configuration:
    return Configuration(values=json.loads(path.read_text()))


def _write_trials(trials, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for trial in trials:
            fh.write(json.dumps(trial_to_json_dict(trial), sort_keys=True))
            fh.write("\n")


@click.group()
def cli() -> None:
    """Zero-shot segmentation pipeline with label-free test-time adaptation."""


@cli.command("gen-bench")
@click.option("--n", default=50, show_default=True, help="Number of samples.")
@click.option("--seed", default=1, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def gen_bench(n: int, seed: int, out_dir: Path) -> None:
    """Generate the synthetic benchmark dataset with task assets."""
    manifest = generate_synthetic_benchmark(n, seed, MockWorldSpec(), out_dir)
    click.echo(f"wrote {len(manifest.samples)} samples to {out_dir}")


@cli.command("adapt")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(path_type=Path))
@click.option("--task", "task_path", required=True, type=click.Path(path_type=Path))
@click.option("--backend", default="mock", show_default=True)
@click.option("--trials", default=100, show_default=True)
@click.option("--subset", default=100, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option(
    "--mode",
    type=click.Choice(["batch", "per-sample"]),
    default="batch",
    show_default=True,
)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def adapt_cmd(
    dataset_dir: Path,
    task_path: Path,
    backend: str,
    trials: int,
    subset: int,
    seed: int,
    mode: str,
    workers: int,
    out_dir: Path,
) -> None:
    """Solve for the best configuration on a dataset subset."""
    backends = _make_backends(backend)
    task = load_task(task_path)
    samples = load_manifest(dataset_dir).load_images()
    settings = AdaptationSettings(
        n_trials=trials,
        subset_size=subset,
        subset_seed=seed,
        mode=MODE_BATCH if mode == "batch" else MODE_PER_SAMPLE,
        workers=workers,
    )
    result = adapt(samples, task, settings, backends)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_trials(result.trials, out_dir / "trials.jsonl")
    _write_config(result.best_config, out_dir / "best_config.json")
    if result.per_sample_configs:
        (out_dir / "per_sample_configs.json").write_text(
            json.dumps(
                {sid: dict(c.values) for sid, c in result.per_sample_configs.items()},
                sort_keys=True,
                indent=2,
            )
            + "\n"
        )

    # Render the optimization curves alongside the delimited trial data.
    from .harness.evaluate import EvalReport

    empty_report = EvalReport(
        per_sample=(), mean_dice=0.0, mean_s_val=0.0, pearson_r=None, config=result.best_config
    )
    emit_plots(empty_report, result.trials, out_dir)
    best = max(t.objective for t in result.trials)
    click.echo(f"best objective {best:.4f} after {len(result.trials)} trials -> {out_dir}")


@cli.command("run")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(path_type=Path))
@click.option("--task", "task_path", required=True, type=click.Path(path_type=Path))
@click.option("--config", "config_path", required=True, type=click.Path(path_type=Path))
@click.option("--backend", default="mock", show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def run_cmd(
    dataset_dir: Path,
    task_path: Path,
    config_path: Path,
    backend: str,
    workers: int,
    out_dir: Path,
) -> None:
    """Segment an entire dataset with a solved configuration."""
    backends = _make_backends(backend)
    task = load_task(task_path)
    config = _read_config(config_path)
    default_space(len(task.grounding_sentences)).validate(config)
    samples = load_manifest(dataset_dir).load_images()
    results = run_dataset(samples, task, config, backends, workers=workers)

    out_dir.mkdir(parents=True, exist_ok=True)
    mask_dir = out_dir / "masks"
    mask_dir.mkdir(exist_ok=True)
    _write_config(config, out_dir / "config.json")
    n_ok = 0
    with open(out_dir / "results.jsonl", "w", encoding="utf-8") as fh:
        for result in results:
            mask_path = None
            if result.status == STATUS_OK:
                mask_path = f"masks/{result.sample_id}.png"
                save_mask(result.mask, out_dir / mask_path)
                n_ok += 1
            record = {
                "sample_id": result.sample_id,
                "status": result.status,
                "s_zc": result.score.s_zc,
                "s_mt": result.score.s_mt,
                "s_val": result.score.s_val,
                "bbox": (
                    [result.bbox.x_min, result.bbox.y_min, result.bbox.x_max, result.bbox.y_max]
                    if result.bbox
                    else None
                ),
                "points": [[p.x, p.y] for p in result.points],
                "mask_path": mask_path,
            }
            fh.write(json.dumps(record, sort_keys=True))
            fh.write("\n")
    click.echo(f"{n_ok}/{len(results)} samples segmented -> {out_dir}")


@cli.command("eval")
@click.option("--results", "results_dir", required=True, type=click.Path(path_type=Path))
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(path_type=Path))
@click.option(
    "--trials",
    "trials_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Optional trial log for the optimization curves.",
)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def eval_cmd(results_dir: Path, dataset_dir: Path, trials_path: Path | None, out_dir: Path) -> None:
    """Score stored results against dataset ground truth and render the report."""
    from .core_types import load_mask
    from .pipeline import SampleResult
    from .validator import ValidationScore

    manifest = load_manifest(dataset_dir)
    truths = manifest.load_masks()
    config = _read_config(results_dir / "config.json")

    results = []
    with open(results_dir / "results.jsonl", "r", encoding="utf-8") as fh:
        for line in fh:
            record = json.loads(line)
            score = ValidationScore(record["s_zc"], record["s_mt"], record["s_val"])
            mask = None
            if record["mask_path"]:
                mask = load_mask(results_dir / record["mask_path"])
            results.append(
                SampleResult(
                    sample_id=record["sample_id"],
                    status=record["status"],
                    score=score,
                    mask=mask,
                )
            )
    report = evaluate(results, truths, config)
    trials = read_trial_log(trials_path) if trials_path else []

    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    with open(out_dir / "report.csv", "w", encoding="utf-8") as fh:
        fh.write("sample_id,dice,s_val,status\n")
        for entry in report.per_sample:
            fh.write(f"{entry.id},{entry.dice!r},{entry.s_val!r},{entry.status}\n")
    emit_plots(report, trials, out_dir)
    r_text = "n/a" if report.pearson_r is None else f"{report.pearson_r:.3f}"
    click.echo(f"mean Dice {report.mean_dice:.4f}, pearson r {r_text} -> {out_dir}")


@cli.command("ablate")
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(path_type=Path))
@click.option("--task", "task_path", required=True, type=click.Path(path_type=Path))
@click.option("--backend", default="mock", show_default=True)
@click.option("--regime", type=click.Choice(REGIMES), required=True)
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Solved configuration; when omitted, adapt runs first.",
)
@click.option("--trials", default=100, show_default=True)
@click.option("--subset", default=100, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("--workers", default=1, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(path_type=Path))
def ablate_cmd(
    dataset_dir: Path,
    task_path: Path,
    backend: str,
    regime: str,
    config_path: Path | None,
    trials: int,
    subset: int,
    seed: int,
    workers: int,
    out_dir: Path,
) -> None:
    """Re-run inference with the transform blocks swapped per regime.

    The regime name picks the source of the grounding-input block and the
    segmentation-input block ('optimal', 'base' or 'random'); prompt
    parameters always come from the solved configuration.
    """
    backends = _make_backends(backend)
    task = load_task(task_path)
    manifest = load_manifest(dataset_dir)
    samples = manifest.load_images()
    space = default_space(len(task.grounding_sentences))

    if config_path is not None:
        optimal = _read_config(config_path)
        space.validate(optimal)
    else:
        settings = AdaptationSettings(
            n_trials=trials, subset_size=subset, subset_seed=seed, workers=workers
        )
        optimal = adapt(samples, task, settings, backends).best_config

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    sources = {
        "optimal": optimal,
        "base": base_config(space),
        "random": sample_uniform(space, rng),
    }
    grd_source, seg_source = regime.split("-")
    values = {}
    for name in space.names:
        if name.startswith(GROUNDING_PREFIX) and name != PROMPT_ID:
            values[name] = sources[grd_source][name]
        elif name.startswith(SEGMENTATION_PREFIX):
            values[name] = sources[seg_source][name]
        else:
            values[name] = optimal[name]  # prompt params stay at the solved choice
    regime_config = Configuration(values=values)
    space.validate(regime_config)

    results = run_dataset(samples, task, regime_config, backends, workers=workers)
    report = evaluate(results, manifest.load_masks(), regime_config)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_config(regime_config, out_dir / "config.json")
    (out_dir / "report.json").write_text(json.dumps(report.to_json_dict(), indent=2) + "\n")
    emit_plots(report, [], out_dir)
    click.echo(f"regime {regime}: mean Dice {report.mean_dice:.4f} -> {out_dir}")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit codes: 1 usage, 2 runtime failure."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.exceptions.Abort:
        return 1
    except (SegadaptError, OSError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
