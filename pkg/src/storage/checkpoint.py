"""
Versioned binary container for tensors plus a JSON header.

Layout (all integers little-endian)::

    magic      4 bytes  b"RGAN"
    version    u32
    header     u32 length + UTF-8 JSON (sorted keys)
    tensors    u32 count, then per tensor:
                 u16 name length + UTF-8 name
                 u8 dtype tag, u8 rank, rank x u32 dims
                 raw little-endian values
    rng state  u32 length + UTF-8 JSON (sorted keys)
    step       u64

Writing the same content twice yields identical bytes.
"""

import io
import json
import logging
import struct
from collections import OrderedDict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import numpy as np

from src.core.constants import Constants
from src.core.errors import CheckpointError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DTYPE_TAGS = {
    np.dtype("<f4"): 0,
    np.dtype("<f8"): 1,
    np.dtype("<i8"): 2,
    np.dtype("u1"): 3,
}
TAG_DTYPES = {tag: dtype for dtype, tag in DTYPE_TAGS.items()}


@dataclass
class CheckpointData:
    header: Dict[str, Any]
    tensors: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    rng_state: Dict[str, Any] = field(default_factory=dict)
    step: int = 0
    version: int = Constants.CHECKPOINT_VERSION


def _json_block(value: Mapping[str, Any]) -> bytes:
    payload = json.dumps(value, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return struct.pack("<I", len(payload)) + payload


def encode_checkpoint(data: CheckpointData) -> bytes:
    out = io.BytesIO()
    out.write(Constants.CHECKPOINT_MAGIC)
    out.write(struct.pack("<I", data.version))
    out.write(_json_block(data.header))
    out.write(struct.pack("<I", len(data.tensors)))
    for name, array in data.tensors.items():
        array = np.asarray(array)
        dtype = array.dtype.newbyteorder("<") if array.dtype.itemsize > 1 else array.dtype
        if dtype not in DTYPE_TAGS:
            raise CheckpointError(f"cannot store tensor {name} of dtype {array.dtype}")
        encoded = name.encode("utf-8")
        out.write(struct.pack("<H", len(encoded)))
        out.write(encoded)
        out.write(struct.pack("<BB", DTYPE_TAGS[dtype], array.ndim))
        out.write(struct.pack(f"<{array.ndim}I", *array.shape))
        out.write(np.ascontiguousarray(array, dtype=dtype).tobytes())
    out.write(_json_block(data.rng_state))
    out.write(struct.pack("<Q", data.step))
    return out.getvalue()


class _Reader:
    def __init__(self, raw: bytes, source: str):
        self.raw = raw
        self.pos = 0
        self.source = source

    def take(self, count: int, what: str) -> bytes:
        if self.pos + count > len(self.raw):
            raise CheckpointError(
                f"truncated checkpoint {self.source}: {what} needs {count} bytes at offset {self.pos}, "
                f"file has {len(self.raw)}"
            )
        chunk = self.raw[self.pos : self.pos + count]
        self.pos += count
        return chunk

    def unpack(self, fmt: str, what: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt), what))

    def json_block(self, what: str) -> Dict[str, Any]:
        (length,) = self.unpack("<I", f"{what} length")
        try:
            return json.loads(self.take(length, what).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as e:
            raise CheckpointError(f"corrupt {what} block in checkpoint {self.source}: {e}") from e


def decode_checkpoint(raw: bytes, source: str = "<bytes>") -> CheckpointData:
    reader = _Reader(raw, source)
    if len(raw) < len(Constants.CHECKPOINT_MAGIC) or raw[:4] != Constants.CHECKPOINT_MAGIC:
        raise CheckpointError(f"bad checkpoint header in {source}")
    reader.take(4, "magic")
    (version,) = reader.unpack("<I", "version")
    if version != Constants.CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version mismatch in {source}: file has version {version}, "
            f"this build reads version {Constants.CHECKPOINT_VERSION}"
        )
    header = reader.json_block("config")

    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    (count,) = reader.unpack("<I", "tensor count")
    for _ in range(count):
        (name_len,) = reader.unpack("<H", "tensor name length")
        name = reader.take(name_len, "tensor name").decode("utf-8")
        tag, rank = reader.unpack("<BB", f"tensor {name} descriptor")
        if tag not in TAG_DTYPES:
            raise CheckpointError(f"unknown dtype tag {tag} for tensor {name} in {source}")
        dims = reader.unpack(f"<{rank}I", f"tensor {name} dims")
        dtype = TAG_DTYPES[tag]
        nbytes = int(np.prod(dims, dtype=np.int64)) * dtype.itemsize
        values = np.frombuffer(reader.take(nbytes, f"tensor {name} data"), dtype=dtype)
        tensors[name] = values.reshape(dims).astype(dtype.newbyteorder("="))

    rng_state = reader.json_block("rng state")
    (step,) = reader.unpack("<Q", "step")
    if reader.pos != len(raw):
        raise CheckpointError(f"trailing {len(raw) - reader.pos} bytes after checkpoint data in {source}")
    return CheckpointData(header=header, tensors=tensors, rng_state=rng_state, step=step, version=version)


def write_checkpoint(path: PathLike, data: CheckpointData) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = encode_checkpoint(data)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
    logger.debug(f"Wrote checkpoint {path} ({len(payload)} bytes, {len(data.tensors)} tensors)")
    return path


def read_checkpoint(path: PathLike) -> CheckpointData:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint {path} not found")
    return decode_checkpoint(path.read_bytes(), source=str(path))
