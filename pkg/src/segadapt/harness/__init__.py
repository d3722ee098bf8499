from .dataset import DatasetManifest, SampleEntry, load_manifest
from .evaluate import EvalReport, SampleEval, dice, evaluate, pearson
from .report import emit_plots
from .synthetic import generate_synthetic_benchmark, write_task_assets

__all__ = [
    "DatasetManifest",
    "EvalReport",
    "SampleEntry",
    "SampleEval",
    "dice",
    "emit_plots",
    "evaluate",
    "generate_synthetic_benchmark",
    "load_manifest",
    "pearson",
    "write_task_assets",
]
