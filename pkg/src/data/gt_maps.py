"""Exact frame-level maps from domain X to domain Y, registered by task name."""

import abc
import logging
from typing import Dict, Type

import numpy as np

from src.core.constants import Constants
from src.core.errors import ConfigError
from src.data import scene
from src.data.stream import VideoStream
from src.models.config import SyntheticSceneConfig

logger = logging.getLogger(__name__)


class GroundTruthMap(abc.ABC):
    """
    Memoryless, exactly invertible map between frame spaces.

    ``forward`` and ``inverse`` accept one frame [C,H,W] or a stack [T,C,H,W].
    """

    name: str = "abstract_map"

    def __init__(self, config: SyntheticSceneConfig):
        self.config = config

    @abc.abstractmethod
    def forward_frame(self, frame: np.ndarray) -> np.ndarray:
        """X frame -> its true Y counterpart."""

    @abc.abstractmethod
    def inverse_frame(self, frame: np.ndarray) -> np.ndarray:
        """Y frame -> the X frame it came from."""

    @abc.abstractmethod
    def forward_labels(self, labels: np.ndarray) -> np.ndarray:
        """Label maps of X frames -> label maps of their Y counterparts."""

    def _apply(self, fn, frames: np.ndarray) -> np.ndarray:
        frames = np.asarray(frames)
        if frames.ndim == 3:
            return fn(frames)
        return np.stack([fn(f) for f in frames]) if len(frames) else frames.copy()

    def forward(self, frames: np.ndarray) -> np.ndarray:
        return self._apply(self.forward_frame, frames).astype(np.asarray(frames).dtype)

    def inverse(self, frames: np.ndarray) -> np.ndarray:
        return self._apply(self.inverse_frame, frames).astype(np.asarray(frames).dtype)

    def forward_stream(self, stream: VideoStream) -> VideoStream:
        labels = None if stream.labels is None else self.forward_labels(stream.labels)
        return VideoStream(
            domain=Constants.DOMAIN_Y,
            frames=self.forward(stream.frames),
            labels=labels,
            stream_id=stream.stream_id,
            condition=stream.condition,
            n_classes=stream.n_classes,
        )

    def describe(self) -> Dict[str, object]:
        return {"map": self.name}


class SceneTranslationMap(GroundTruthMap):
    """
    Channel permutation, horizontal mirror and (optionally) disc -> square.

    Without the shape swap the map is a pure pixel rearrangement, defined on
    every frame and distance preserving. With it the object is re-rendered from
    the state recovered from the frame, so the map is defined on rendered frames.
    """

    name = Constants.TASK_IMAGE2IMAGE

    def __init__(self, config: SyntheticSceneConfig):
        super().__init__(config)
        self.permutation = np.asarray(config.permutation)
        self.inverse_permutation = np.argsort(self.permutation)

    def _mirror(self, array: np.ndarray) -> np.ndarray:
        return array[..., ::-1].copy() if self.config.mirror else array.copy()

    def forward_frame(self, frame: np.ndarray) -> np.ndarray:
        if self.config.shape_swap:
            center, radius = scene.recover_state(frame)
            frame, _ = scene.render(center, radius, self.config, shape="square")
        return self._mirror(np.asarray(frame)[self.permutation])

    def inverse_frame(self, frame: np.ndarray) -> np.ndarray:
        x_style = self._mirror(np.asarray(frame))[self.inverse_permutation]
        if self.config.shape_swap:
            center, radius = scene.recover_state(x_style)
            x_style, _ = scene.render(center, radius, self.config, shape="disc")
        return x_style

    def forward_labels(self, labels: np.ndarray) -> np.ndarray:
        labels = np.asarray(labels)
        if not self.config.shape_swap:
            return self._mirror(labels)
        single = labels.ndim == 2
        stack = labels[None] if single else labels
        out = []
        for label_map in stack:
            center, radius = scene.state_from_mask(label_map == Constants.CLASS_OBJECT)
            _, square_labels = scene.render(center, radius, self.config, shape="square")
            out.append(self._mirror(square_labels))
        result = np.stack(out)
        return result[0] if single else result

    def describe(self) -> Dict[str, object]:
        return {
            "map": self.name,
            "permutation": list(self.config.permutation),
            "mirror": self.config.mirror,
            "shape_swap": self.config.shape_swap,
        }


class LabelRenderingMap(GroundTruthMap):
    """X frame -> palette image of its label map; the inverse re-renders the scene."""

    name = Constants.TASK_IMAGE2LABELS

    def forward_frame(self, frame: np.ndarray) -> np.ndarray:
        center, radius = scene.recover_state(frame)
        _, labels = scene.render(center, radius, self.config)
        return scene.render_labels(labels)

    def inverse_frame(self, frame: np.ndarray) -> np.ndarray:
        labels = scene.decode_labels(frame)
        center, radius = scene.state_from_mask(labels == Constants.CLASS_OBJECT)
        x_frame, _ = scene.render(center, radius, self.config)
        return x_frame

    def forward_labels(self, labels: np.ndarray) -> np.ndarray:
        return np.asarray(labels).copy()


GT_MAPS: Dict[str, Type[GroundTruthMap]] = {
    SceneTranslationMap.name: SceneTranslationMap,
    LabelRenderingMap.name: LabelRenderingMap,
}


def build_gt_map(config: SyntheticSceneConfig) -> GroundTruthMap:
    map_cls = GT_MAPS.get(config.task)
    if map_cls is None:
        raise ConfigError(f"No ground-truth map for task '{config.task}' (known: {sorted(GT_MAPS)})")
    return map_cls(config)
