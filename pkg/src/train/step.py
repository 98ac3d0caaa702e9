"""One alternating optimization step: discriminators first, then generators and predictors."""

import logging
from typing import List, Tuple

from src.core.constants import Constants
from src.core.errors import DivergenceError, NumericalError
from src.data.stream import TripletBatch
from src.losses import adversarial_loss, compose_objective
from src.models.reports import LossReport
from src.nn import generator_forward
from src.tensor import GradTape, Tensor, scale
from src.train.optimizer import adam_update
from src.train.schedule import lr_at
from src.train.state import TrainState

logger = logging.getLogger(__name__)


def trainable_nets(state: TrainState) -> List[str]:
    """Networks the generator-side objective updates under the configured loss mode."""
    nets = [Constants.NET_G_X, Constants.NET_G_Y]
    if state.config.include_recycle:
        nets += [Constants.NET_P_X, Constants.NET_P_Y]
    return nets


def _ensure_finite(value: Tensor, what: str, state: TrainState) -> None:
    if not value.is_finite():
        raise DivergenceError(f"non-finite {what} at step {state.step}", step=state.step)


def _update(state: TrainState, net: str, lr: float) -> None:
    try:
        adam_update(state.nets[net], None, state.moments[net], lr, (state.config.beta1, state.config.beta2))
    except NumericalError as e:
        raise DivergenceError(f"{e} at step {state.step}", step=state.step) from e


def train_step(
    state: TrainState, batch_x: TripletBatch, batch_y: TripletBatch
) -> Tuple[TrainState, LossReport]:
    """
    Translate the current frames of both batches on the generator tape, then:

    1. show real frames and pooled, detached fakes to D_X and D_Y and update them;
    2. evaluate the generator-side objective against the updated discriminators
       and update G_X, G_Y (and P_X, P_Y when recycle terms are active).
       Discriminator gradients from this phase are discarded.
    """
    cfg = state.config
    lr = lr_at(state.step, cfg)
    mode = cfg.adversarial_mode
    nets = state.nets

    with GradTape() as tape:
        x_curr, y_curr = batch_x.curr, batch_y.curr
        fake_y = generator_forward(nets[Constants.NET_G_Y], x_curr)
        fake_x = generator_forward(nets[Constants.NET_G_X], y_curr)

        pooled_x = Tensor(state.pools[Constants.DOMAIN_X].query(fake_x.data, state.rng))
        pooled_y = Tensor(state.pools[Constants.DOMAIN_Y].query(fake_y.data, state.rng))

        with GradTape() as d_tape:
            disc_x = adversarial_loss(nets[Constants.NET_D_X], x_curr, pooled_x, mode, side="discriminator")
            disc_y = adversarial_loss(nets[Constants.NET_D_Y], y_curr, pooled_y, mode, side="discriminator")
            d_total = scale(disc_x + disc_y, cfg.weights.adversarial)
            _ensure_finite(d_total, "discriminator loss", state)
            d_params = [t for net in Constants.DISCRIMINATOR_NETS for t in nets[net].tensors()]
            d_tape.backward(d_total, inputs=d_params)
        for net in Constants.DISCRIMINATOR_NETS:
            _update(state, net, lr)
            nets[net].clear_grad()

        objective = compose_objective(
            nets,
            batch_x,
            batch_y,
            cfg.weights,
            include_cycle=cfg.include_cycle,
            include_recycle=cfg.include_recycle,
            mode=mode,
            norm=cfg.reconstruction_norm,
            fakes=(fake_x, fake_y),
        )
        _ensure_finite(objective.total, "generator objective", state)
        updated = trainable_nets(state)
        g_params = [t for net in updated for t in nets[net].tensors()]
        tape.backward(objective.total, inputs=g_params)

    for net in updated:
        _update(state, net, lr)
    for params in nets.values():
        params.clear_grad()

    report = objective.report()
    report.disc_X = disc_x.item()
    report.disc_Y = disc_y.item()
    state.step += 1
    logger.debug(f"step {state.step}: total={report.total:.6f} disc_X={report.disc_X:.6f} disc_Y={report.disc_Y:.6f}")
    return state, report
