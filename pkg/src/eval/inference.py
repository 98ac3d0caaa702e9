"""Framewise and predictor-smoothed translation of whole streams."""

import logging
from typing import Optional

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError
from src.data.stream import VideoStream
from src.losses.objective import NetLike, as_mapping, as_predictor
from src.tensor import Tensor, no_grad

logger = logging.getLogger(__name__)

DEFAULT_CHUNK = 16


def _other(domain: str) -> str:
    return Constants.DOMAIN_Y if domain == Constants.DOMAIN_X else Constants.DOMAIN_X


def translate_frames(G: NetLike, frames: np.ndarray, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    mapping = as_mapping(G)
    out = []
    with no_grad():
        for start in range(0, len(frames), chunk):
            out.append(mapping(Tensor(frames[start : start + chunk])).data)
    if not out:
        return np.array(frames)
    return np.concatenate(out).astype(frames.dtype)


def infer_framewise(G: NetLike, stream: VideoStream, target_domain: Optional[str] = None) -> VideoStream:
    """y_t = G(x_t) for every frame."""
    frames = translate_frames(G, stream.frames)
    return stream.with_frames(frames, domain=target_domain or _other(stream.domain), keep_labels=False)


def infer_smoothed(
    G: NetLike, P: NetLike, stream: VideoStream, target_domain: Optional[str] = None, chunk: int = DEFAULT_CHUNK
) -> VideoStream:
    """
    y_t = (G(x_t) + P(G(x_{t-2}), G(x_{t-1}))) / 2 for t >= 2; the first two
    frames stay framewise. The predictor always sees framewise outputs.
    """
    if len(stream) < 3:
        raise DataError(f"smoothed inference needs at least 3 frames, stream has {len(stream)}")
    framewise = translate_frames(G, stream.frames, chunk)
    predictor = as_predictor(P)
    smoothed = framewise.copy()
    with no_grad():
        for start in range(2, len(stream), chunk):
            stop = min(start + chunk, len(stream))
            predicted = predictor(
                Tensor(framewise[start - 2 : stop - 2]), Tensor(framewise[start - 1 : stop - 1])
            ).data
            smoothed[start:stop] = (framewise[start:stop] + predicted) / 2
    return stream.with_frames(smoothed.astype(stream.frames.dtype), domain=target_domain or _other(stream.domain), keep_labels=False)
