"""The training loop: sampling, steps, loss CSV and periodic checkpoints."""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

from src.core.errors import ConfigError, DataError, DivergenceError
from src.data.stream import VideoStream, sample_from_streams
from src.models.config import TrainConfig
from src.models.reports import LossReport
from src.train.schedule import lr_at
from src.train.state import TrainState, init_train_state, load_checkpoint, save_checkpoint
from src.train.step import train_step

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Streams = Union[VideoStream, Sequence[VideoStream]]

LOSS_CSV = "loss.csv"
FINAL_CHECKPOINT = "checkpoint.rgan"
PERIODIC_CHECKPOINT = "checkpoint_{:06d}.rgan"

# fields that may change between a run and its resumption
RESUMABLE_FIELDS = {"steps", "checkpoint_interval", "log_interval"}


@dataclass
class FitResult:
    state: TrainState
    reports: List[LossReport] = field(default_factory=list)
    checkpoint_path: Optional[Path] = None
    loss_csv: Optional[Path] = None


def _check_stream(stream: VideoStream, config: TrainConfig) -> None:
    if len(stream) < 3:
        raise DataError(f"stream {stream.domain}/{stream.stream_id} has {len(stream)} frames, training needs 3")
    if stream.image_size != config.image_size or stream.frames.shape[3] != config.image_size:
        raise DataError(
            f"stream {stream.domain}/{stream.stream_id} frames are {stream.frame_shape}, "
            f"config image_size is {config.image_size}"
        )
    if stream.channels != config.channels:
        raise DataError(f"stream {stream.domain}/{stream.stream_id} has {stream.channels} channels, config {config.channels}")


def _prepare(streams: Streams, config: TrainConfig) -> List[VideoStream]:
    streams = [streams] if isinstance(streams, VideoStream) else list(streams)
    if not streams:
        raise DataError("training needs at least one stream per domain")
    prepared = [s.astype(config.precision) for s in streams]
    for stream in prepared:
        _check_stream(stream, config)
    return prepared


def _check_resumable(saved: TrainConfig, requested: TrainConfig, step: int) -> None:
    """The requested run must agree with the checkpoint on everything the first ``step`` steps depended on."""
    if requested.decay_start is None and requested.steps != saved.steps:
        raise ConfigError(
            f"cannot resume with steps={requested.steps}: the checkpoint decays the learning rate from step "
            f"{saved.resolved_decay_start}, set decay_start explicitly to change steps"
        )
    saved, requested = saved.pinned(), requested.pinned()
    a = saved.model_dump(exclude=RESUMABLE_FIELDS)
    b = requested.model_dump(exclude=RESUMABLE_FIELDS)
    changed = sorted(k for k in a if a[k] != b[k])
    if changed:
        raise ConfigError(f"cannot resume: checkpoint config differs in {changed}")
    if any(lr_at(s, saved) != lr_at(s, requested) for s in range(step)):
        raise ConfigError(
            f"cannot resume at step {step} with steps={requested.steps}: "
            f"the learning rate had already decayed toward step {saved.steps}"
        )


def _open_csv(path: Path, keep_rows: int):
    """Loss CSV holding the header and the first ``keep_rows`` rows of any previous run."""
    kept: List[List[str]] = []
    if keep_rows and path.exists():
        with path.open(newline="") as handle:
            rows = list(csv.reader(handle))
        kept = rows[1 : keep_rows + 1]
    handle = path.open("w", newline="")
    writer = csv.writer(handle)
    writer.writerow(LossReport.csv_header())
    writer.writerows(kept)
    return handle, writer


def fit(
    config: TrainConfig,
    stream_x: Streams,
    stream_y: Streams,
    run_dir: Optional[PathLike] = None,
    resume_from: Optional[PathLike] = None,
) -> FitResult:
    """
    Run ``train_step`` until ``config.steps``, one triplet batch per domain per
    step drawn from the run generator. Each domain may be one stream or several
    (one per condition).

    With ``run_dir`` every step appends a row to ``loss.csv``, a checkpoint is
    written every ``checkpoint_interval`` steps and a final one at the end.
    ``resume_from`` continues a run from one of its checkpoints.
    """
    if resume_from is not None:
        state = load_checkpoint(resume_from)
        _check_resumable(state.config, config, state.step)
        state.config = config.pinned()
        logger.info(f"Resuming from {resume_from} at step {state.step}")
    else:
        state = init_train_state(config.pinned())
    config = state.config
    streams_x = _prepare(stream_x, config)
    streams_y = _prepare(stream_y, config)

    result = FitResult(state=state)
    run_path = Path(run_dir) if run_dir is not None else None
    handle = writer = None
    if run_path is not None:
        run_path.mkdir(parents=True, exist_ok=True)
        result.loss_csv = run_path / LOSS_CSV
        handle, writer = _open_csv(result.loss_csv, state.step if resume_from is not None else 0)

    last: Optional[LossReport] = None
    try:
        while state.step < config.steps:
            batch_x = sample_from_streams(streams_x, config.batch_size, state.rng)
            batch_y = sample_from_streams(streams_y, config.batch_size, state.rng)
            step = state.step
            try:
                state, report = train_step(state, batch_x, batch_y)
            except DivergenceError as e:
                e.last_report = last
                logger.error(f"Training diverged at step {step}: {e}")
                raise
            last = report
            result.reports.append(report)
            if writer is not None:
                writer.writerow(report.csv_row(step))
            if state.step % config.log_interval == 0 or state.step == config.steps:
                logger.info(
                    f"step {state.step}/{config.steps} lr={lr_at(step, config):.2e} total={report.total:.4f} "
                    f"recycle={report.recycle_X + report.recycle_Y:.4f} "
                    f"disc={report.disc_X + report.disc_Y:.4f}"
                )
            if (
                run_path is not None
                and config.checkpoint_interval
                and state.step % config.checkpoint_interval == 0
                and state.step < config.steps
            ):
                save_checkpoint(state, run_path / PERIODIC_CHECKPOINT.format(state.step))
    finally:
        if handle is not None:
            handle.close()

    if run_path is not None:
        result.checkpoint_path = save_checkpoint(state, run_path / FINAL_CHECKPOINT)
        logger.info(f"Saved checkpoint {result.checkpoint_path}")
    return result
