from src.losses.objective import (
    ObjectiveTerms,
    adversarial_loss,
    compose_objective,
    cycle_loss,
    reconstruction,
    recurrent_loss,
    recycle_loss,
    regression_loss,
    total_objective,
)

__all__ = [
    "ObjectiveTerms",
    "regression_loss",
    "reconstruction",
    "adversarial_loss",
    "cycle_loss",
    "recurrent_loss",
    "recycle_loss",
    "compose_objective",
    "total_objective",
]
