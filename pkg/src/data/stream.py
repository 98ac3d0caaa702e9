"""Ordered single-domain frame streams and triplet sampling."""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Union

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError, ShapeError
from src.tensor import Tensor, resolve_dtype

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator]


def as_generator(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class VideoStream:
    """
    Frames [T,C,H,W] in temporal order with values in [-1,1], plus optional
    per-frame label maps [T,H,W] of class ids.
    """

    domain: str
    frames: np.ndarray
    labels: Optional[np.ndarray] = None
    stream_id: str = "stream0"
    condition: Optional[str] = None
    n_classes: int = Constants.N_CLASSES

    def __post_init__(self):
        if self.domain not in (Constants.DOMAIN_X, Constants.DOMAIN_Y):
            raise DataError(f"domain must be X or Y, got '{self.domain}'")
        self.frames = np.asarray(self.frames)
        if self.frames.ndim != 4:
            raise ShapeError(f"stream frames must be [T,C,H,W], got {self.frames.shape}")
        if not np.issubdtype(self.frames.dtype, np.floating):
            raise DataError(f"stream frames must be floating point, got {self.frames.dtype}")
        if not np.all(np.isfinite(self.frames)):
            raise DataError(f"stream {self.stream_id} holds non-finite pixels")
        if self.labels is not None:
            self.labels = np.asarray(self.labels)
            expected = (self.frames.shape[0],) + self.frames.shape[2:]
            if self.labels.shape != expected:
                raise ShapeError(f"label maps {self.labels.shape} do not align with frames {self.frames.shape}")
            if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.n_classes):
                raise DataError(
                    f"label ids must lie in [0, {self.n_classes}), got [{self.labels.min()}, {self.labels.max()}]"
                )
            self.labels = self.labels.astype(np.int64)

    def __len__(self) -> int:
        return int(self.frames.shape[0])

    @property
    def frame_shape(self):
        return tuple(self.frames.shape[1:])

    @property
    def image_size(self) -> int:
        return int(self.frames.shape[2])

    @property
    def channels(self) -> int:
        return int(self.frames.shape[1])

    def frame(self, t: int) -> Tensor:
        return Tensor(self.frames[t])

    def batch(self, indices: Sequence[int]) -> Tensor:
        return Tensor(self.frames[np.asarray(indices, dtype=np.int64)])

    def with_frames(self, frames: np.ndarray, domain: Optional[str] = None, keep_labels: bool = True) -> "VideoStream":
        return VideoStream(
            domain=domain or self.domain,
            frames=frames,
            labels=self.labels if keep_labels else None,
            stream_id=self.stream_id,
            condition=self.condition,
            n_classes=self.n_classes,
        )

    def astype(self, precision: str) -> "VideoStream":
        return self.with_frames(self.frames.astype(resolve_dtype(precision)))


@dataclass
class Triplet:
    """Frames t-1, t, t+1 of one stream."""

    t: int
    x_prev: np.ndarray
    x_curr: np.ndarray
    x_next: np.ndarray
    stream_id: str = "stream0"


@dataclass
class TripletBatch:
    triplets: List[Triplet] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.triplets)

    @property
    def indices(self) -> List[int]:
        return [tr.t for tr in self.triplets]

    def _stacked(self, attr: str) -> Tensor:
        if not self.triplets:
            raise ShapeError("empty triplet batch")
        return Tensor(np.stack([getattr(tr, attr) for tr in self.triplets]))

    @property
    def prev(self) -> Tensor:
        return self._stacked("x_prev")

    @property
    def curr(self) -> Tensor:
        return self._stacked("x_curr")

    @property
    def next(self) -> Tensor:
        return self._stacked("x_next")


def triplet_at(stream: VideoStream, t: int) -> Triplet:
    if not 1 <= t <= len(stream) - 2:
        raise DataError(f"triplet center {t} outside [1, {len(stream) - 2}]")
    return Triplet(t, stream.frames[t - 1], stream.frames[t], stream.frames[t + 1], stream.stream_id)


def sample_triplets(stream: VideoStream, batch_size: int, rng_seed: Seed) -> TripletBatch:
    """Uniform centers t in [1, T-2]; deterministic given the seed or generator state."""
    if batch_size <= 0:
        raise DataError(f"batch_size must be positive, got {batch_size}")
    if len(stream) < 3:
        raise DataError(f"stream {stream.stream_id} has {len(stream)} frames, triplets need at least 3")
    rng = as_generator(rng_seed)
    centers = rng.integers(1, len(stream) - 1, size=batch_size)
    return TripletBatch([triplet_at(stream, int(t)) for t in centers])


def sample_from_streams(streams: Sequence[VideoStream], batch_size: int, rng_seed: Seed) -> TripletBatch:
    """
    Triplets from several streams of one domain: each triplet picks its stream
    uniformly, then its centre. A single stream samples exactly like
    ``sample_triplets``.
    """
    if not streams:
        raise DataError("no streams to sample from")
    if len(streams) == 1:
        return sample_triplets(streams[0], batch_size, rng_seed)
    if batch_size <= 0:
        raise DataError(f"batch_size must be positive, got {batch_size}")
    rng = as_generator(rng_seed)
    triplets = []
    for _ in range(batch_size):
        stream = streams[int(rng.integers(0, len(streams)))]
        triplets.append(sample_triplets(stream, 1, rng).triplets[0])
    return TripletBatch(triplets)
