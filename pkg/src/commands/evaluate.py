"""
``eval``: score one checkpoint (or two, side by side) on held-out streams.

Held-out streams are rendered in memory from the run's scene settings with
``eval_seed``, one pair per condition, unless ``--input`` names a stored X
stream. Segmentation metrics are reported per condition and for all
conditions pooled.
"""

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from src.core.config import RunConfig
from src.core.constants import Constants
from src.core.errors import DataError
from src.data import GroundTruthMap, VideoStream, generate_synthetic_domains, gt_map_for_stream
from src.eval import (
    OracleSegmenter,
    comparison_table,
    diversity_probe,
    load_segmenter,
    oracle_image_score,
    pooled_seg_metrics,
    predicted_labels,
    save_segmenter,
    seg_metrics,
    train_segmenter,
    translation_mse,
)
from src.models.reports import EvalReport
from src.storage import load_dataset, load_stream
from src.train import TrainState, load_checkpoint
from src.train.loop import FINAL_CHECKPOINT

logger = logging.getLogger(__name__)

REPORT_JSON = "eval_report.json"
REPORT_CSV = "eval.csv"
COMPARISON_TXT = "comparison.txt"
SEGMENTER_FILE = "segmenter.rgan"
POOLED = "all"


@dataclass
class HeldOut:
    condition: str
    stream_x: VideoStream
    gt_map: GroundTruthMap


def heldout_streams(config: RunConfig) -> List[HeldOut]:
    if config.input_dir:
        stream = load_stream(config.input_dir, domain=Constants.DOMAIN_X)
        if config.scene.task == Constants.TASK_IMAGE2LABELS and stream.labels is None:
            raise DataError(f"image-to-labels evaluation needs label maps next to the frames in {config.input_dir}")
        return [HeldOut(stream.condition or config.scene.condition, stream, gt_map_for_stream(config.scene, stream))]

    heldout = []
    for i, condition in enumerate(config.conditions):
        scene = config.scene_for(condition).model_copy(update={"frames": config.eval_frames})
        seed = config.eval_seed + 2 * i
        stream_x, _, gt_map = generate_synthetic_domains(scene, seed, seed + 1)
        heldout.append(HeldOut(condition, stream_x, gt_map))
    return heldout


def obtain_oracle(config: RunConfig, heldout: List[HeldOut]) -> Optional[OracleSegmenter]:
    """The stored oracle segmenter, or a fresh one trained on the dataset's labelled X streams."""
    path = Path(config.segmenter_path) if config.segmenter_path else Path(config.run_dir) / SEGMENTER_FILE
    if path.exists():
        oracle = load_segmenter(path)
        logger.info(f"Loaded oracle segmenter from {path}")
    else:
        streams = [s for s in load_dataset(config.data_dir, Constants.DOMAIN_X) if s.labels is not None]
        oracle = train_segmenter(streams, config.segmenter, heldout=[h.stream_x for h in heldout])
        save_segmenter(oracle, path)
        logger.info(f"Saved oracle segmenter to {path}")
    if not oracle.qualified:
        logger.warning("Oracle segmenter did not qualify; the oracle score is left out of the report")
        return None
    return oracle


def evaluate_checkpoint(
    state: TrainState,
    name: str,
    task: str,
    heldout: List[HeldOut],
    oracle: Optional[OracleSegmenter] = None,
    diversity_sample: int = 16,
) -> EvalReport:
    to_y = state[Constants.NET_G_Y]
    to_x = state[Constants.NET_G_X]
    streams = [h.stream_x.astype(state.config.precision) for h in heldout]
    report = EvalReport(checkpoint=name, task=task)

    if task == Constants.TASK_IMAGE2LABELS:
        pairs = []
        for held, stream in zip(heldout, streams):
            pred = predicted_labels(to_y, stream)
            pairs.append((pred, stream.labels))
            report.seg_metrics[held.condition] = seg_metrics(pred, stream.labels, stream.n_classes)
        report.seg_metrics[POOLED] = pooled_seg_metrics(pairs, streams[0].n_classes)
        if oracle is not None:
            scores = [oracle_image_score(to_x, stream, oracle) for stream in streams]
            report.oracle_score = float(np.mean(scores))

    report.translation_mse = float(
        np.mean([translation_mse(to_y, stream, held.gt_map) for held, stream in zip(heldout, streams)])
    )
    report.diversity = diversity_probe(to_y, streams[0], sample=diversity_sample)
    return report


def checkpoint_label(path: Path, taken: List[str]) -> str:
    label = path.parent.name if path.name == FINAL_CHECKPOINT and path.parent.name else path.stem
    while label in taken:
        label = f"{label}'"
    return label


def write_reports(output_dir: Path, reports: Dict[str, EvalReport]) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    payload = "[\n" + ",\n".join(r.model_dump_json(indent=2) for r in reports.values()) + "\n]\n"
    (output_dir / REPORT_JSON).write_text(payload)

    rows = [r.csv_row() for r in reports.values()]
    fields: List[str] = []
    for row in rows:
        fields.extend(k for k in row if k not in fields)
    with (output_dir / REPORT_CSV).open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=fields, restval="")
        writer.writeheader()
        writer.writerows(rows)


def run(config: RunConfig) -> int:
    paths = [Path(config.checkpoint) if config.checkpoint else Path(config.run_dir) / FINAL_CHECKPOINT]
    if config.compare_checkpoint:
        paths.append(Path(config.compare_checkpoint))
    for path in paths:
        if not path.exists():
            raise DataError(f"checkpoint {path} not found")

    heldout = heldout_streams(config)
    task = config.scene.task
    oracle = obtain_oracle(config, heldout) if task == Constants.TASK_IMAGE2LABELS else None

    reports: Dict[str, EvalReport] = {}
    for path in paths:
        state = load_checkpoint(path)
        if state.config.image_size != heldout[0].stream_x.image_size:
            raise DataError(
                f"checkpoint {path} was trained at {state.config.image_size}px, "
                f"held-out frames are {heldout[0].stream_x.image_size}px"
            )
        label = checkpoint_label(path, list(reports))
        reports[label] = evaluate_checkpoint(state, label, task, heldout, oracle, config.diversity_sample)
        logger.info(f"Evaluated {path} as '{label}'")

    output_dir = Path(config.output_dir) if config.output_dir else Path(config.run_dir)
    write_reports(output_dir, reports)

    for report in reports.values():
        print(report.model_dump_json(indent=2))
    if len(reports) > 1:
        table = comparison_table(reports)
        (output_dir / COMPARISON_TXT).write_text(table + "\n")
        print(table)
    print(f"✅ Evaluation written to {output_dir / REPORT_JSON} and {output_dir / REPORT_CSV}")
    return Constants.EXIT_OK
