from src.models.config import TrainConfig


def lr_at(step: int, config: TrainConfig) -> float:
    """Constant until the decay start, then linear down to 0 at ``config.steps``."""
    start = config.resolved_decay_start
    if step < start or config.steps <= start:
        return config.lr
    remaining = (config.steps - step) / (config.steps - start)
    return config.lr * max(remaining, 0.0)
