from src.train.image_pool import ImagePool
from src.train.loop import FitResult, fit
from src.train.optimizer import AdamState, adam_update
from src.train.schedule import lr_at
from src.train.state import (
    TrainState,
    init_train_state,
    load_checkpoint,
    save_checkpoint,
    state_from_checkpoint,
    state_to_checkpoint,
)
from src.train.step import train_step, trainable_nets

__all__ = [
    "AdamState",
    "adam_update",
    "ImagePool",
    "lr_at",
    "TrainState",
    "init_train_state",
    "save_checkpoint",
    "load_checkpoint",
    "state_to_checkpoint",
    "state_from_checkpoint",
    "train_step",
    "trainable_nets",
    "fit",
    "FitResult",
]
