#!/usr/bin/env python3
"""
Train cycle, recycle and combined models over several seeds and compare them.

Every run goes through the ``rgan`` command line (gen-data, train, eval), so the
artifacts under ``--work-dir`` are the same ones a user would get by hand. The
image-to-labels task gives the segmentation scores and the diversity ratio; the
image-to-image task gives the translation error against the true map.

    python script/reproduce_trend.py --seeds 0,1,2 --steps 2000
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Dict, List

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.eval import comparison_table  # noqa: E402
from src.main import main as rgan  # noqa: E402
from src.models.reports import DiversityReport, EvalReport, SegMetrics  # noqa: E402

MODES = ["cycle", "recycle", "combined"]
TASKS = ["image2labels", "image2image"]


def run_or_exit(argv: List[str]) -> None:
    code = rgan(argv)
    if code != 0:
        print(f"❌ rgan {' '.join(argv)} exited with {code}")
        sys.exit(code)


def run_one(work_dir: Path, task: str, mode: str, seed: int, args: argparse.Namespace) -> dict:
    """Generate (once per task and seed), train and evaluate one configuration."""
    data_dir = work_dir / task / f"data_seed{seed}"
    run_dir = work_dir / task / f"{mode}_seed{seed}"
    common = ["--set", f"scene.task={task}", "--set", f"frames={args.frames}", "--set", f"image_size={args.image_size}"]
    if not (data_dir / "manifest.txt").exists():
        run_or_exit(common + ["gen-data", "--data-dir", str(data_dir), "--seed", str(10 * seed + 1)])
    if not (run_dir / "checkpoint.rgan").exists():
        run_or_exit(
            common
            + [
                "train",
                "--data-dir", str(data_dir),
                "--run-dir", str(run_dir),
                "--loss", mode,
                "--steps", str(args.steps),
                "--seed", str(seed),
            ]
        )
    eval_argv = common + [
        "eval",
        "--run-dir", str(run_dir),
        "--data-dir", str(data_dir),
        "--segmenter", str(work_dir / "segmenter.rgan"),
    ]
    run_or_exit(eval_argv)
    return json.loads((run_dir / "eval_report.json").read_text())[0]


def mean_of(values: List[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def averaged(mode: str, labels: List[dict], images: List[dict]) -> EvalReport:
    """One report per mode: every field is the mean over seeds."""
    report = EvalReport(checkpoint=mode, task="image2labels")
    pooled = [r["seg_metrics"]["all"] for r in labels if "all" in r.get("seg_metrics", {})]
    if pooled:
        report.seg_metrics["all"] = SegMetrics(
            mean_pixel_accuracy=mean_of([m["mean_pixel_accuracy"] for m in pooled]),
            average_class_accuracy=mean_of([m["average_class_accuracy"] for m in pooled]),
            mean_iou=mean_of([m["mean_iou"] for m in pooled]),
        )
    scores = [r["oracle_score"] for r in labels if r.get("oracle_score") is not None]
    if scores:
        report.oracle_score = mean_of(scores)
    diversity = [r["diversity"] for r in labels if r.get("diversity")]
    if diversity:
        report.diversity = DiversityReport(
            input_dispersion=mean_of([d["input_dispersion"] for d in diversity]),
            output_dispersion=mean_of([d["output_dispersion"] for d in diversity]),
            ratio=mean_of([d["ratio"] for d in diversity]),
        )
    report.translation_mse = mean_of([r["translation_mse"] for r in images])
    return report


def verdict(name: str, holds: bool) -> None:
    print(f"{'✅' if holds else '⚠️ '} {name}")


def main() -> int:
    parser = argparse.ArgumentParser(description="Compare cycle, recycle and combined training over seeds")
    parser.add_argument("--work-dir", type=Path, default=Path("runs/trend"))
    parser.add_argument("--seeds", type=lambda s: [int(x) for x in s.split(",")], default=[0, 1, 2])
    parser.add_argument("--modes", type=lambda s: s.split(","), default=MODES)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--frames", type=int, default=500)
    parser.add_argument("--image-size", type=int, default=32)
    args = parser.parse_args()

    results: Dict[str, Dict[str, List[dict]]] = {mode: {task: [] for task in TASKS} for mode in args.modes}
    for seed in args.seeds:
        for mode in args.modes:
            for task in TASKS:
                print(f"🔄 {task} {mode} seed {seed}")
                results[mode][task].append(run_one(args.work_dir, task, mode, seed, args))

    reports = {mode: averaged(mode, r["image2labels"], r["image2image"]) for mode, r in results.items()}
    table = comparison_table(reports)
    print(f"\n📊 Means over seeds {args.seeds}, {args.steps} steps at {args.image_size}px\n")
    print(table)
    (args.work_dir / "trend.txt").write_text(table + "\n")

    if {"cycle", "recycle"} <= set(reports):
        cycle, recycle = reports["cycle"], reports["recycle"]
        if "all" in cycle.seg_metrics and "all" in recycle.seg_metrics:
            verdict("recycle IoU above cycle", recycle.seg_metrics["all"].mean_iou > cycle.seg_metrics["all"].mean_iou)
        verdict("recycle translation error below cycle", recycle.translation_mse < cycle.translation_mse)
        if cycle.diversity and recycle.diversity:
            verdict("recycle diversity ratio at least cycle's", recycle.diversity.ratio >= cycle.diversity.ratio)
            print(f"   cycle diversity ratio: {cycle.diversity.ratio:.4f}")
    if {"cycle", "combined"} <= set(reports):
        cycle, combined = reports["cycle"], reports["combined"]
        if "all" in cycle.seg_metrics and "all" in combined.seg_metrics:
            verdict(
                "combined IoU at least cycle's",
                combined.seg_metrics["all"].mean_iou >= cycle.seg_metrics["all"].mean_iou,
            )
    return 0


if __name__ == "__main__":
    sys.exit(main())
