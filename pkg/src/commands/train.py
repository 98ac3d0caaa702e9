"""``train``: fit all six networks on the dataset and write the checkpoint and loss CSV."""

import logging
from pathlib import Path

from src.core.config import CONFIG_NAME, RunConfig
from src.core.constants import Constants
from src.core.errors import DataError
from src.storage import load_dataset
from src.train import fit

logger = logging.getLogger(__name__)


def run(config: RunConfig) -> int:
    train_config = config.train
    streams_x = load_dataset(config.data_dir, Constants.DOMAIN_X)
    streams_y = load_dataset(config.data_dir, Constants.DOMAIN_Y)
    if not streams_x or not streams_y:
        raise DataError(f"dataset {config.data_dir} needs streams in both domains")

    run_dir = Path(config.run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    config.to_file(run_dir / CONFIG_NAME)
    logger.info(
        f"Training {train_config.loss_mode} for {train_config.steps} steps on "
        f"{len(streams_x)}+{len(streams_y)} streams"
    )

    result = fit(train_config, streams_x, streams_y, run_dir=run_dir, resume_from=config.resume)

    print(f"✅ Training finished at step {result.state.step} ({train_config.loss_mode})")
    print(f"   Checkpoint: {result.checkpoint_path}")
    print(f"   Loss CSV: {result.loss_csv}")
    if result.reports:
        last = result.reports[-1]
        print(f"   Final total loss: {last.total:.6f}")
    return Constants.EXIT_OK
