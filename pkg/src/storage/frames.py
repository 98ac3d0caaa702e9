"""
Streams on disk: 8-bit binary PPM (P6) frames, PGM (P5) label maps and a
plain-text manifest.

Layout::

    <root>/manifest.txt
    <root>/<domain>/<stream_id>/frame_000000.ppm
    <root>/<domain>/<stream_id>/label_000000.pgm
"""

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from src.core.constants import Constants
from src.core.errors import DataError
from src.data.stream import VideoStream

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

FRAME_RE = re.compile(r"^frame_(\d{6})\.ppm$")
LABEL_RE = re.compile(r"^label_(\d{6})\.pgm$")


def to_bytes(frame: np.ndarray) -> np.ndarray:
    """[-1,1] floats -> uint8."""
    scaled = np.rint((np.clip(frame, -1.0, 1.0) + 1.0) * 127.5)
    return scaled.astype(np.uint8)


def from_bytes(values: np.ndarray, dtype=np.float32) -> np.ndarray:
    return (values.astype(np.float64) / 127.5 - 1.0).astype(dtype)


def write_ppm(path: PathLike, frame: np.ndarray) -> None:
    """Write a [3,H,W] frame in [-1,1]."""
    frame = np.asarray(frame)
    if frame.ndim != 3 or frame.shape[0] != 3:
        raise DataError(f"PPM frames must be [3,H,W], got {frame.shape}")
    _, h, w = frame.shape
    pixels = np.ascontiguousarray(to_bytes(frame).transpose(1, 2, 0))
    Path(path).write_bytes(f"P6\n{w} {h}\n255\n".encode("ascii") + pixels.tobytes())


def write_pgm(path: PathLike, labels: np.ndarray) -> None:
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise DataError(f"PGM label maps must be [H,W], got {labels.shape}")
    if labels.size and (labels.min() < 0 or labels.max() > 255):
        raise DataError(f"label ids must fit in one byte, got [{labels.min()}, {labels.max()}]")
    h, w = labels.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n255\n".encode("ascii") + labels.astype(np.uint8).tobytes())


def _parse_netpbm(path: Path, magic: bytes, channels: int) -> np.ndarray:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e

    tokens: List[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DataError(f"corrupt image file {path.name}: truncated header")
        tokens.append(raw[start:pos])
    pos += 1  # single whitespace after maxval

    if tokens[0] != magic:
        raise DataError(f"corrupt image file {path.name}: expected {magic.decode()} header, got {tokens[0]!r}")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as e:
        raise DataError(f"corrupt image file {path.name}: bad header {tokens[1:]}") from e
    if maxval != 255 or width <= 0 or height <= 0:
        raise DataError(f"corrupt image file {path.name}: unsupported header {width}x{height} max {maxval}")

    expected = width * height * channels
    body = raw[pos : pos + expected]
    if len(body) != expected:
        raise DataError(f"corrupt image file {path.name}: expected {expected} pixel bytes, found {len(body)}")
    values = np.frombuffer(body, dtype=np.uint8)
    if channels == 1:
        return values.reshape(height, width)
    return values.reshape(height, width, channels).transpose(2, 0, 1)


def read_ppm(path: PathLike, dtype=np.float32) -> np.ndarray:
    return from_bytes(_parse_netpbm(Path(path), b"P6", 3), dtype)


def read_pgm(path: PathLike) -> np.ndarray:
    return _parse_netpbm(Path(path), b"P5", 1).astype(np.int64)


def stream_dir(root: PathLike, domain: str, stream_id: str) -> Path:
    return Path(root) / domain / stream_id


def save_stream(stream: VideoStream, directory: PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for t in range(len(stream)):
        write_ppm(directory / Constants.FRAME_PATTERN.format(t), stream.frames[t])
        if stream.labels is not None:
            write_pgm(directory / Constants.LABEL_PATTERN.format(t), stream.labels[t])
    logger.debug(f"Wrote {len(stream)} frames to {directory}")
    return directory


def _indexed(directory: Path, pattern: "re.Pattern[str]") -> Dict[int, Path]:
    found = {}
    for path in directory.iterdir():
        match = pattern.match(path.name)
        if match:
            found[int(match.group(1))] = path
    return found


def _check_contiguous(indices: List[int], directory: Path, kind: str) -> None:
    for expected, index in enumerate(indices):
        if index != expected:
            raise DataError(f"missing {kind} index {expected} in {directory} (found {index} next)")


def load_stream(
    directory: PathLike,
    domain: Optional[str] = None,
    condition: Optional[str] = None,
    n_classes: int = Constants.N_CLASSES,
    dtype=np.float32,
) -> VideoStream:
    """Frames sorted by index with pixels mapped back to [-1,1]; labels when present."""
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError(f"stream directory {directory} does not exist")
    frames_found = _indexed(directory, FRAME_RE)
    if not frames_found:
        raise DataError(f"no frames found in {directory}")
    indices = sorted(frames_found)
    _check_contiguous(indices, directory, "frame")

    frames = np.stack([read_ppm(frames_found[i], dtype) for i in indices])

    labels = None
    labels_found = _indexed(directory, LABEL_RE)
    if labels_found:
        label_indices = sorted(labels_found)
        _check_contiguous(label_indices, directory, "label")
        if len(label_indices) != len(indices):
            raise DataError(
                f"{directory} holds {len(indices)} frames but {len(label_indices)} label maps"
            )
        labels = np.stack([read_pgm(labels_found[i]) for i in label_indices])

    if domain is None:
        domain = directory.parent.name
    return VideoStream(
        domain=domain,
        frames=frames,
        labels=labels,
        stream_id=directory.name,
        condition=condition,
        n_classes=n_classes,
    )


@dataclass
class ManifestEntry:
    domain: str
    stream_id: str
    frames: int
    condition: str = "-"

    def line(self) -> str:
        return f"{self.domain} {self.stream_id} {self.frames} {self.condition}"


def write_manifest(root: PathLike, entries: List[ManifestEntry]) -> Path:
    path = Path(root) / Constants.MANIFEST_NAME
    lines = ["# domain stream_id frames condition"] + [e.line() for e in entries]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_manifest(root: PathLike) -> List[ManifestEntry]:
    path = Path(root) / Constants.MANIFEST_NAME
    if not path.exists():
        raise DataError(f"dataset manifest {path} not found")
    entries = []
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4 or not parts[2].isdigit():
            raise DataError(f"malformed manifest line {number} in {path}: {line!r}")
        entries.append(ManifestEntry(parts[0], parts[1], int(parts[2]), parts[3]))
    return entries


def load_dataset(root: PathLike, domain: Optional[str] = None, dtype=np.float32) -> List[VideoStream]:
    """Every stream listed in the manifest (optionally one domain), in manifest order."""
    streams = []
    for entry in read_manifest(root):
        if domain is not None and entry.domain != domain:
            continue
        stream = load_stream(
            stream_dir(root, entry.domain, entry.stream_id),
            domain=entry.domain,
            condition=None if entry.condition == "-" else entry.condition,
            dtype=dtype,
        )
        if len(stream) != entry.frames:
            raise DataError(
                f"manifest lists {entry.frames} frames for {entry.domain}/{entry.stream_id}, found {len(stream)}"
            )
        streams.append(stream)
    return streams


def save_dataset(root: PathLike, streams: List[VideoStream]) -> Path:
    entries = []
    for stream in streams:
        save_stream(stream, stream_dir(root, stream.domain, stream.stream_id))
        entries.append(ManifestEntry(stream.domain, stream.stream_id, len(stream), stream.condition or "-"))
    return write_manifest(root, entries)


def stream_summary(stream: VideoStream) -> Tuple[str, int, float, float]:
    return stream.stream_id, len(stream), float(stream.frames.min()), float(stream.frames.max())
