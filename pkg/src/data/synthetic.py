"""Unpaired two-domain synthetic video with a known cross-domain map."""

import logging
from typing import Optional, Tuple

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError
from src.data import scene
from src.data.gt_maps import GroundTruthMap, build_gt_map
from src.data.stream import VideoStream
from src.models.config import SyntheticSceneConfig

logger = logging.getLogger(__name__)


def trajectory(config: SyntheticSceneConfig, rng: np.random.Generator) -> np.ndarray:
    """
    Integer object centres [T,2] (row, col) of a smooth random walk.

    Velocity is an exponential moving average of Gaussian kicks, capped at
    ``max_speed`` and reflected at the walls; the margin keeps the object and
    its shadow fully inside the frame.
    """
    margin = config.radius + config.shadow_offset + 1
    lo, hi = float(margin), float(config.image_size - 1 - margin)
    position = rng.uniform(lo, hi, size=2)
    velocity = rng.normal(0.0, config.max_speed / 2, size=2)
    centers = np.empty((config.frames, 2), dtype=np.int64)
    for t in range(config.frames):
        kick = rng.normal(0.0, config.max_speed, size=2)
        velocity = config.smoothness * velocity + (1.0 - config.smoothness) * kick
        speed = float(np.hypot(*velocity))
        if speed > config.max_speed:
            velocity = velocity * (config.max_speed / speed)
        position = position + velocity
        for axis in range(2):
            if position[axis] < lo:
                position[axis] = 2 * lo - position[axis]
                velocity[axis] = -velocity[axis]
            elif position[axis] > hi:
                position[axis] = 2 * hi - position[axis]
                velocity[axis] = -velocity[axis]
        position = np.clip(position, lo, hi)
        centers[t] = np.rint(position).astype(np.int64)
    return centers


def generate_stream(
    config: SyntheticSceneConfig, seed: int, stream_id: Optional[str] = None, dtype=np.float32
) -> VideoStream:
    """One X-style labelled stream following its own trajectory."""
    if config.frames < 3:
        raise DataError(f"streams need at least 3 frames, got {config.frames}")
    centers = trajectory(config, np.random.default_rng(seed))
    frames = np.empty((config.frames, scene.CHANNELS, config.image_size, config.image_size), dtype=dtype)
    labels = np.empty((config.frames, config.image_size, config.image_size), dtype=np.int64)
    for t, center in enumerate(centers):
        frames[t], labels[t] = scene.render(tuple(center), config.radius, config)
    return VideoStream(
        domain=Constants.DOMAIN_X,
        frames=frames,
        labels=labels,
        stream_id=stream_id or config.condition,
        condition=config.condition,
        n_classes=config.n_classes,
    )


def generate_synthetic_domains(
    config: SyntheticSceneConfig, seed_x: int, seed_y: int
) -> Tuple[VideoStream, VideoStream, GroundTruthMap]:
    """
    Domain X: a labelled scene stream. Domain Y: the ground-truth map applied
    to an independently generated scene stream (different trajectory), so the
    two streams are never paired while the map still links them exactly.
    """
    if seed_x == seed_y:
        raise DataError(f"domain seeds must differ to keep the streams unpaired, got {seed_x} twice")
    gt_map = build_gt_map(config)
    stream_x = generate_stream(config, seed_x)
    stream_y = gt_map.forward_stream(generate_stream(config, seed_y))
    logger.debug(
        f"Generated {config.task} streams for condition '{config.condition}': "
        f"{len(stream_x)} frames of {stream_x.frame_shape}"
    )
    return stream_x, stream_y, gt_map


def gt_map_for_stream(config: SyntheticSceneConfig, stream: VideoStream) -> GroundTruthMap:
    """Ground-truth map matching the condition a stream was rendered under."""
    if stream.condition and stream.condition != config.condition:
        config = config.model_copy(update={"condition": stream.condition})
    return build_gt_map(config)


def temporal_coherence(stream: VideoStream) -> float:
    """Mean per-pixel absolute difference between consecutive frames."""
    if len(stream) < 2:
        return 0.0
    return float(np.abs(np.diff(stream.frames.astype(np.float64), axis=0)).mean())
