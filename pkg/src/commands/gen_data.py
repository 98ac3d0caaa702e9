"""``gen-data``: write both synthetic domains, one stream per condition, plus the manifest."""

import logging
import shutil
from pathlib import Path
from typing import List

from src.core.config import CONFIG_NAME, RunConfig
from src.core.constants import Constants
from src.core.errors import DataError
from src.data import VideoStream, generate_synthetic_domains, temporal_coherence
from src.storage import save_dataset
from src.storage.frames import stream_summary

logger = logging.getLogger(__name__)

# seeds of the i-th condition are offset so conditions follow different trajectories
CONDITION_SEED_STRIDE = 100


def prepare_output_dir(data_dir: Path, force: bool) -> None:
    if data_dir.exists() and not data_dir.is_dir():
        raise DataError(f"output path {data_dir} exists and is not a directory")
    if data_dir.exists() and any(data_dir.iterdir()):
        if not force:
            raise DataError(f"output directory {data_dir} is not empty; pass --force to overwrite it")
        logger.warning(f"Removing existing dataset in {data_dir}")
        shutil.rmtree(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)


def generate_streams(config: RunConfig) -> List[VideoStream]:
    """X streams for every condition first, then the Y streams, in condition order."""
    streams_x, streams_y = [], []
    for i, condition in enumerate(config.conditions):
        offset = i * CONDITION_SEED_STRIDE
        stream_x, stream_y, _ = generate_synthetic_domains(
            config.scene_for(condition), config.seed_x + offset, config.seed_y + offset
        )
        streams_x.append(stream_x)
        streams_y.append(stream_y)
    return streams_x + streams_y


def run(config: RunConfig) -> int:
    data_dir = Path(config.data_dir)
    prepare_output_dir(data_dir, config.force)
    streams = generate_streams(config)
    manifest = save_dataset(data_dir, streams)
    config.to_file(data_dir / CONFIG_NAME)
    logger.info(f"Wrote {len(streams)} streams to {data_dir}")

    print(f"✅ Dataset written to {data_dir} ({config.scene.task})")
    print(f"   Manifest: {manifest}")
    for stream in streams:
        stream_id, frames, low, high = stream_summary(stream)
        labels = "labels" if stream.labels is not None else "no labels"
        print(
            f"   {stream.domain}/{stream_id}: {frames} frames {stream.frame_shape}, "
            f"range [{low:.3f}, {high:.3f}], coherence {temporal_coherence(stream):.4f}, {labels}"
        )
    return Constants.EXIT_OK
