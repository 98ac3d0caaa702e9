"""``infer``: translate one stored stream with a trained checkpoint."""

import logging
from pathlib import Path
from typing import Dict, Tuple

from src.core.config import RunConfig
from src.core.constants import Constants
from src.core.errors import DataError
from src.data import VideoStream
from src.eval import infer_framewise, infer_smoothed
from src.storage import load_stream, save_stream
from src.storage.frames import stream_dir
from src.train import TrainState, load_checkpoint
from src.train.loop import FINAL_CHECKPOINT

logger = logging.getLogger(__name__)

# translating X uses the generator into Y and the predictor of Y, and vice versa
TRANSLATORS = {
    Constants.DOMAIN_X: (Constants.NET_G_Y, Constants.NET_P_Y, Constants.DOMAIN_Y),
    Constants.DOMAIN_Y: (Constants.NET_G_X, Constants.NET_P_X, Constants.DOMAIN_X),
}


def checkpoint_path(config: RunConfig) -> Path:
    path = Path(config.checkpoint) if config.checkpoint else Path(config.run_dir) / FINAL_CHECKPOINT
    if not path.exists():
        raise DataError(f"checkpoint {path} not found")
    return path


def check_compatible(state: TrainState, stream: VideoStream, source: Path) -> None:
    expected = (state.config.channels, state.config.image_size, state.config.image_size)
    if stream.frame_shape != expected:
        raise DataError(f"checkpoint {source} was trained on frames {expected}, stream has {stream.frame_shape}")


def translate(state: TrainState, stream: VideoStream, smooth: bool) -> Tuple[VideoStream, str]:
    generator, predictor, target = TRANSLATORS[stream.domain]
    stream = stream.astype(state.config.precision)
    if smooth:
        return infer_smoothed(state[generator], state[predictor], stream, target_domain=target), "smoothed"
    return infer_framewise(state[generator], stream, target_domain=target), "framewise"


def write_sidecar(directory: Path, lines: Dict[str, object]) -> Path:
    path = directory / Constants.SIDECAR_NAME
    path.write_text("".join(f"{key} = {value}\n" for key, value in lines.items()))
    return path


def run(config: RunConfig) -> int:
    source = checkpoint_path(config)
    state = load_checkpoint(source)
    input_dir = Path(config.input_dir) if config.input_dir else stream_dir(
        config.data_dir, config.domain, config.conditions[0]
    )
    stream = load_stream(input_dir, domain=config.domain)
    check_compatible(state, stream, source)

    generated, mode = translate(state, stream, config.smooth)
    output_dir = Path(config.output_dir) if config.output_dir else stream_dir(
        Path(config.run_dir) / "generated", generated.domain, stream.stream_id
    )
    save_stream(generated, output_dir)
    sidecar = write_sidecar(
        output_dir,
        {
            "mode": mode,
            "checkpoint": source,
            "step": state.step,
            "source": input_dir,
            "source_domain": stream.domain,
            "target_domain": generated.domain,
            "frames": len(generated),
        },
    )
    logger.info(f"Translated {len(stream)} frames {stream.domain}->{generated.domain} ({mode})")

    print(f"✅ Generated {len(generated)} {mode} frames in {output_dir}")
    print(f"   Sidecar: {sidecar}")
    return Constants.EXIT_OK
