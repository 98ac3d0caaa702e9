from src.storage.checkpoint import CheckpointData, read_checkpoint, write_checkpoint
from src.storage.frames import (
    ManifestEntry,
    load_dataset,
    load_stream,
    read_manifest,
    save_dataset,
    save_stream,
    write_manifest,
)

__all__ = [
    "CheckpointData",
    "read_checkpoint",
    "write_checkpoint",
    "ManifestEntry",
    "load_stream",
    "save_stream",
    "load_dataset",
    "save_dataset",
    "read_manifest",
    "write_manifest",
]
