"""The oracle segmenter: a small U-Net trained on real labelled synthetic frames."""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np
from pydantic import ValidationError

from src.core.errors import CheckpointError, DataError
from src.data.stream import VideoStream, as_generator
from src.eval.metrics import pooled_seg_metrics
from src.models.config import SegmenterConfig, UNetConfig
from src.models.reports import SegMetrics
from src.nn import NetworkParams, init_params, parameter_specs, segmenter_forward
from src.storage.checkpoint import CheckpointData, read_checkpoint, write_checkpoint
from src.tensor import GradTape, Tensor, cross_entropy, no_grad
from src.train.optimizer import AdamState, adam_update

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SEGMENTER_KIND = "segmenter"


@dataclass
class OracleSegmenter:
    params: NetworkParams
    config: SegmenterConfig
    heldout_metrics: Optional[SegMetrics] = None

    @property
    def n_classes(self) -> int:
        return self.params.descriptor.output_channels

    @property
    def qualified(self) -> bool:
        return (
            self.heldout_metrics is not None
            and self.heldout_metrics.mean_iou >= self.config.qualification_iou
        )

    def require_qualified(self) -> None:
        if not self.qualified:
            measured = None if self.heldout_metrics is None else round(self.heldout_metrics.mean_iou, 4)
            raise DataError(
                f"oracle segmenter is not qualified: held-out mean IoU {measured} "
                f"below {self.config.qualification_iou}"
            )


def segment(oracle: Union[OracleSegmenter, NetworkParams], frames: np.ndarray, chunk: int = 16) -> np.ndarray:
    """Label maps [T,H,W] by per-pixel argmax of the segmenter logits."""
    params = oracle.params if isinstance(oracle, OracleSegmenter) else oracle
    dtype = params.dtype
    out = []
    with no_grad():
        for start in range(0, len(frames), chunk):
            logits = segmenter_forward(params, Tensor(np.asarray(frames[start : start + chunk], dtype=dtype)))
            out.append(logits.data.argmax(axis=1))
    if not out:
        return np.zeros((0,) + tuple(np.shape(frames)[2:]), dtype=np.int64)
    return np.concatenate(out).astype(np.int64)


def evaluate_segmenter(
    oracle: Union[OracleSegmenter, NetworkParams], streams: Sequence[VideoStream]
) -> SegMetrics:
    pairs = []
    for stream in streams:
        if stream.labels is None:
            raise DataError(f"stream {stream.stream_id} has no labels to evaluate against")
        pairs.append((segment(oracle, stream.frames), stream.labels))
    n_classes = oracle.n_classes if isinstance(oracle, OracleSegmenter) else oracle.descriptor.output_channels
    return pooled_seg_metrics(pairs, n_classes)


def train_segmenter(
    streams: Sequence[VideoStream],
    config: Optional[SegmenterConfig] = None,
    heldout: Optional[Sequence[VideoStream]] = None,
) -> OracleSegmenter:
    """
    Fit the segmenter with per-pixel softmax cross-entropy on labelled real
    frames, then measure it on ``heldout`` streams to decide qualification.
    """
    config = config or SegmenterConfig()
    if not streams:
        raise DataError("train_segmenter needs at least one labelled stream")
    for stream in streams:
        if stream.labels is None:
            raise DataError(f"stream {stream.stream_id} has no labels; the oracle trains on real labelled frames")
    first = streams[0]
    descriptor = config.network_config(first.image_size, first.channels, first.n_classes)
    params = init_params(descriptor, config.seed, name="segmenter")
    moments = AdamState.zeros_like(params)
    rng = as_generator(config.seed)
    dtype = params.dtype

    frames = np.concatenate([s.frames for s in streams]).astype(dtype)
    labels = np.concatenate([s.labels for s in streams])
    for step in range(config.steps):
        index = rng.integers(0, len(frames), size=config.batch_size)
        with GradTape() as tape:
            logits = segmenter_forward(params, Tensor(frames[index]), n_classes=first.n_classes)
            loss = cross_entropy(logits, labels[index])
            loss.check_finite("segmenter loss")
            tape.backward(loss, inputs=params.tensors())
        adam_update(params, None, moments, config.lr, (0.9, 0.999))
        params.clear_grad()
        if (step + 1) % 100 == 0:
            logger.info(f"segmenter step {step + 1}/{config.steps} loss={loss.item():.4f}")

    oracle = OracleSegmenter(params=params, config=config)
    if heldout:
        oracle.heldout_metrics = evaluate_segmenter(oracle, heldout)
        logger.info(
            f"Oracle segmenter held-out mean IoU {oracle.heldout_metrics.mean_iou:.4f} "
            f"(qualifies at {config.qualification_iou})"
        )
    return oracle


def save_segmenter(oracle: OracleSegmenter, path: PathLike) -> Path:
    header = {
        "kind": SEGMENTER_KIND,
        "config": oracle.config.model_dump(mode="json"),
        "network": oracle.params.descriptor.model_dump(mode="json"),
        "heldout_metrics": None if oracle.heldout_metrics is None else oracle.heldout_metrics.model_dump(mode="json"),
    }
    tensors = OrderedDict((f"net/segmenter/{k}", v) for k, v in oracle.params.numpy_state().items())
    return write_checkpoint(path, CheckpointData(header=header, tensors=tensors))


def load_segmenter(path: PathLike) -> OracleSegmenter:
    data = read_checkpoint(path)
    if data.header.get("kind") != SEGMENTER_KIND:
        raise CheckpointError(f"{path} holds '{data.header.get('kind')}', not a segmenter")
    try:
        config = SegmenterConfig.model_validate(data.header["config"])
        descriptor = UNetConfig.model_validate(data.header["network"])
        metrics = data.header.get("heldout_metrics")
        heldout = None if metrics is None else SegMetrics.model_validate(metrics)
    except (KeyError, ValidationError) as e:
        raise CheckpointError(f"invalid segmenter header in {path}: {e}") from e
    names: List[str] = [spec.name for spec in parameter_specs(descriptor)]
    missing = [n for n in names if f"net/segmenter/{n}" not in data.tensors]
    if missing:
        raise CheckpointError(f"segmenter checkpoint {path} is missing tensors {missing}")
    arrays = OrderedDict((n, data.tensors[f"net/segmenter/{n}"]) for n in names)
    params = NetworkParams.from_arrays(descriptor, arrays, name="segmenter")
    return OracleSegmenter(params=params, config=config, heldout_metrics=heldout)
