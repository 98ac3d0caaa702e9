"""
Procedural scene rendering: a textured background, one moving flat-coloured
shape and its shadow.

The object colour lies outside every background and shadow value, so the
object mask, and from its bounding box the integer centre and radius, can be
read back from any rendered frame. That recovery is what makes the
ground-truth maps exactly invertible.
"""

from functools import lru_cache
from typing import Tuple

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError
from src.models.config import SyntheticSceneConfig

OBJECT_COLOR = np.array([0.9, 0.2, -0.4])
OBJECT_TOLERANCE = 0.02
BACKGROUND_RANGE = (-0.6, 0.2)
BACKGROUND_CLIP = (-0.95, 0.4)
SHADOW_GAIN = 0.5
SHADOW_SHIFT = -0.35

# label id -> colour of its rendering in a label image
PALETTE = np.array(
    [
        [-0.5, 0.5, -0.5],
        [1.0, -1.0, -1.0],
        [-1.0, -1.0, 1.0],
    ]
)

# gain, per-channel tint, contrast
CONDITION_STYLES = {
    "day": (1.0, (0.0, 0.0, 0.0), 1.0),
    "sunset": (0.9, (0.15, -0.05, -0.2), 1.1),
    "rain": (0.75, (-0.1, -0.05, 0.05), 0.7),
    "snow": (0.6, (0.2, 0.2, 0.25), 0.5),
    "night": (0.4, (-0.35, -0.35, -0.2), 0.8),
}

CHANNELS = 3


@lru_cache(maxsize=32)
def background(image_size: int, texture_seed: int, condition: str) -> np.ndarray:
    """Static [3,H,W] texture for one condition; read-only."""
    if condition not in CONDITION_STYLES:
        raise DataError(f"Unknown condition '{condition}', expected one of {list(CONDITION_STYLES)}")
    rng = np.random.default_rng(texture_seed)
    coords = np.arange(image_size) / image_size
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    texture = np.zeros((CHANNELS, image_size, image_size))
    for c in range(CHANNELS):
        for _ in range(3):
            fy, fx = rng.uniform(0.5, 2.0, size=2)
            phase = rng.uniform(0.0, 2 * np.pi)
            texture[c] += np.sin(2 * np.pi * (fy * yy + fx * xx) + phase)
    lo, hi = BACKGROUND_RANGE
    span = texture.max() - texture.min()
    texture = lo + (hi - lo) * (texture - texture.min()) / (span if span > 0 else 1.0)

    gain, tint, contrast = CONDITION_STYLES[condition]
    center = texture.mean()
    styled = gain * (center + contrast * (texture - center)) + np.asarray(tint).reshape(CHANNELS, 1, 1)
    styled = np.clip(styled, *BACKGROUND_CLIP)
    styled.setflags(write=False)
    return styled


def shape_mask(cy: int, cx: int, radius: int, image_size: int, shape: str = "disc") -> np.ndarray:
    rows = np.arange(image_size).reshape(-1, 1)
    cols = np.arange(image_size).reshape(1, -1)
    if shape == "disc":
        return (rows - cy) ** 2 + (cols - cx) ** 2 <= radius**2
    if shape == "square":
        return (np.abs(rows - cy) <= radius) & (np.abs(cols - cx) <= radius)
    raise ValueError(f"Unknown shape '{shape}'")


def render(
    center: Tuple[int, int], radius: int, config: SyntheticSceneConfig, shape: str = "disc"
) -> Tuple[np.ndarray, np.ndarray]:
    """One X-style frame [3,H,W] and its label map [H,W]."""
    cy, cx = int(center[0]), int(center[1])
    size = config.image_size
    bg = background(size, config.texture_seed, config.condition)
    obj = shape_mask(cy, cx, radius, size, shape)
    off = config.shadow_offset
    shadow = shape_mask(cy + off, cx + off, radius, size, shape) & ~obj

    frame = bg.copy()
    frame[:, shadow] = SHADOW_GAIN * bg[:, shadow] + SHADOW_SHIFT
    frame[:, obj] = OBJECT_COLOR.reshape(CHANNELS, 1)

    labels = np.full((size, size), Constants.CLASS_BACKGROUND, dtype=np.int64)
    labels[shadow] = Constants.CLASS_SHADOW
    labels[obj] = Constants.CLASS_OBJECT
    return frame, labels


def object_mask(frame: np.ndarray) -> np.ndarray:
    diff = np.abs(np.asarray(frame) - OBJECT_COLOR.reshape(CHANNELS, 1, 1))
    return np.all(diff <= OBJECT_TOLERANCE, axis=0)


def recover_state(frame: np.ndarray) -> Tuple[Tuple[int, int], int]:
    """(centre, radius) of the object in an X-style frame, from its mask's bounding box."""
    return state_from_mask(object_mask(frame))


def state_from_mask(mask: np.ndarray) -> Tuple[Tuple[int, int], int]:
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        raise DataError("no object found in frame")
    height = rows.max() - rows.min()
    width = cols.max() - cols.min()
    if height != width or height % 2:
        raise DataError(f"object bounding box {height + 1}x{width + 1} is not a centred odd square")
    center = (int(rows.min() + height // 2), int(cols.min() + width // 2))
    return center, int(height // 2)


def render_labels(labels: np.ndarray) -> np.ndarray:
    """Palette image [..., 3, H, W] of label maps [..., H, W]."""
    labels = np.asarray(labels)
    if labels.size and (labels.min() < 0 or labels.max() >= len(PALETTE)):
        raise DataError(f"label ids must lie in [0, {len(PALETTE)})")
    return np.moveaxis(PALETTE[labels], -1, -3)


def decode_labels(frames: np.ndarray) -> np.ndarray:
    """Class ids [..., H, W] of the nearest palette colour per pixel."""
    pixels = np.moveaxis(np.asarray(frames, dtype=np.float64), -3, -1)
    distances = ((pixels[..., None, :] - PALETTE) ** 2).sum(axis=-1)
    return distances.argmin(axis=-1).astype(np.int64)
