"""Scores that compare generator outputs to the known ground truth of synthetic data."""

import logging
from typing import Optional

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError
from src.data.gt_maps import GroundTruthMap
from src.data.scene import decode_labels, render_labels
from src.data.stream import VideoStream
from src.eval.inference import translate_frames
from src.eval.metrics import seg_metrics
from src.eval.segmenter import OracleSegmenter, segment
from src.losses.objective import NetLike
from src.models.reports import DiversityReport, SegMetrics

logger = logging.getLogger(__name__)


def translation_mse(G: NetLike, stream_x: VideoStream, gt_map: GroundTruthMap) -> float:
    """Mean over frames of the per-frame MSE between G(x_t) and gt_map(x_t)."""
    if len(stream_x) == 0:
        raise DataError("translation_mse needs a non-empty stream")
    generated = translate_frames(G, stream_x.frames).astype(np.float64)
    target = gt_map.forward(stream_x.frames).astype(np.float64)
    per_frame = ((generated - target) ** 2).reshape(len(stream_x), -1).mean(axis=1)
    return float(per_frame.mean())


def sample_indices(length: int, sample: int) -> np.ndarray:
    if sample < 2:
        raise DataError(f"diversity probe needs at least 2 frames, got sample={sample}")
    if sample > length:
        raise DataError(f"diversity sample {sample} exceeds stream length {length}")
    return np.rint(np.linspace(0, length - 1, sample)).astype(np.int64)


def dispersion(frames: np.ndarray) -> float:
    """Mean pairwise L2 distance between the flattened frames."""
    flat = np.asarray(frames, dtype=np.float64).reshape(len(frames), -1)
    upper = np.triu_indices(len(flat), k=1)
    distances = np.linalg.norm(flat[:, None, :] - flat[None, :, :], axis=-1)
    return float(distances[upper].mean())


def diversity_probe(G: NetLike, stream: VideoStream, sample: int = 16) -> DiversityReport:
    """
    Compare the spread of ``sample`` uniformly spaced input frames with the
    spread of their translations. A ratio near 0 while the inputs are spread
    out means the generator collapsed them onto near-identical outputs.
    """
    frames = stream.frames[sample_indices(len(stream), sample)]
    input_dispersion = dispersion(frames)
    output_dispersion = dispersion(translate_frames(G, frames))
    ratio = output_dispersion / max(input_dispersion, Constants.DISPERSION_EPS)
    return DiversityReport(input_dispersion=input_dispersion, output_dispersion=output_dispersion, ratio=ratio)


def label_images(stream: VideoStream) -> np.ndarray:
    if stream.labels is None:
        raise DataError(f"stream {stream.stream_id} has no labels")
    return render_labels(stream.labels).astype(stream.frames.dtype)


def predicted_labels(G: NetLike, stream: VideoStream) -> np.ndarray:
    """Class ids decoded from the palette images G produces for the stream."""
    if stream.labels is None:
        raise DataError(f"image-to-labels evaluation needs labels; stream {stream.stream_id} has none")
    return decode_labels(translate_frames(G, stream.frames))


def image_to_labels_metrics(G: NetLike, stream: VideoStream) -> SegMetrics:
    """Translate images to palette label images, decode them and score them against the stream labels."""
    return seg_metrics(predicted_labels(G, stream), stream.labels, stream.n_classes)


def oracle_image_score(
    G: NetLike,
    stream_labels: VideoStream,
    oracle: OracleSegmenter,
    gt_map: Optional[GroundTruthMap] = None,
    real_frames: Optional[np.ndarray] = None,
) -> float:
    """
    Labels-to-image quality: the oracle's mean IoU on G(label image) frames,
    divided by its mean IoU on the real images of the same labels.

    Real images are ``real_frames`` when given, the stream's own frames when
    it is an image stream, and otherwise the inverse of ``gt_map`` applied to
    the label images.
    """
    oracle.require_qualified()
    inputs = label_images(stream_labels)
    if real_frames is None:
        if stream_labels.domain == Constants.DOMAIN_X:
            real_frames = stream_labels.frames
        elif gt_map is not None:
            real_frames = gt_map.inverse(inputs)
        else:
            raise DataError("oracle_image_score needs real frames or a ground-truth map to rebuild them")
    if len(real_frames) != len(stream_labels):
        raise DataError(f"{len(real_frames)} real frames for {len(stream_labels)} label maps")

    n_classes = oracle.n_classes
    generated = translate_frames(G, inputs)
    fake_iou = seg_metrics(segment(oracle, generated), stream_labels.labels, n_classes).mean_iou
    real_iou = seg_metrics(segment(oracle, real_frames), stream_labels.labels, n_classes).mean_iou
    if real_iou <= 0:
        raise DataError("oracle scores zero IoU on real frames; the score is undefined")
    logger.debug(f"oracle IoU fake={fake_iou:.4f} real={real_iou:.4f}")
    return fake_iou / real_iou
