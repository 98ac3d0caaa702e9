"""
Objective terms of the spatiotemporal translation model.

Naming follows the mapping directions: ``G_Y`` maps domain X to Y, ``G_X``
maps Y back to X, ``P_X`` predicts the next X frame and ``D_X`` judges X
frames. Every term is a scalar ``Tensor`` on the active tape. Networks may be
passed as ``NetworkParams`` or as plain callables (test doubles).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple, Union

from src.core.constants import Constants
from src.core.errors import ShapeError
from src.data.stream import TripletBatch
from src.models.config import LossWeights
from src.models.reports import LossReport
from src.nn import NetworkParams, discriminator_forward, generator_forward, predictor_forward
from src.tensor import Tensor, l1_error, log_clamped, scale, sigmoid, square, squared_error

logger = logging.getLogger(__name__)

Mapping = Callable[[Tensor], Tensor]
Predictor = Callable[[Tensor, Tensor], Tensor]
NetLike = Union[NetworkParams, Callable]


def as_mapping(net: NetLike) -> Mapping:
    if isinstance(net, NetworkParams):
        return lambda x: generator_forward(net, x)
    return net


def as_predictor(net: NetLike) -> Predictor:
    if isinstance(net, NetworkParams):
        return lambda prev, curr: predictor_forward(net, prev, curr)
    return net


def as_discriminator(net: NetLike) -> Mapping:
    if isinstance(net, NetworkParams):
        return lambda x: discriminator_forward(net, x)
    return net


def reconstruction(pred: Tensor, target: Tensor, norm: str = "l2") -> Tensor:
    if norm == "l2":
        return squared_error(pred, target)
    if norm == "l1":
        return l1_error(pred, target)
    raise ValueError(f"Unknown reconstruction norm '{norm}'")


def regression_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Paired mean squared error, normalized by element count."""
    return squared_error(pred, target)


def _log_sigmoid(logits: Tensor) -> Tensor:
    return log_clamped(sigmoid(logits), Constants.LOG_EPS)


def _log_one_minus_sigmoid(logits: Tensor) -> Tensor:
    return log_clamped(1.0 - sigmoid(logits), Constants.LOG_EPS)


def adversarial_loss(
    D: NetLike,
    reals: Optional[Tensor],
    fakes: Tensor,
    mode: str = Constants.ADV_LEAST_SQUARES,
    side: str = "discriminator",
) -> Tensor:
    """
    Patch-averaged adversarial loss, always returned as a quantity to minimize.

    discriminator side: least_squares (D(real)-1)^2 + D(fake)^2,
    log -(log sigma(D(real)) + log(1 - sigma(D(fake)))). Fakes are detached.
    generator side: least_squares (D(fake)-1)^2, log log(1 - sigma(D(fake))).
    """
    if mode not in (Constants.ADV_LEAST_SQUARES, Constants.ADV_LOG):
        raise ValueError(f"Unknown adversarial mode '{mode}'")
    if side not in ("discriminator", "generator"):
        raise ValueError(f"Unknown adversarial side '{side}'")
    if fakes is None or fakes.ndim == 0 or fakes.shape[0] == 0:
        raise ShapeError("adversarial loss needs a non-empty fake batch")
    judge = as_discriminator(D)

    if side == "generator":
        fake_logits = judge(fakes)
        if mode == Constants.ADV_LEAST_SQUARES:
            return square(fake_logits - 1.0).mean()
        return _log_one_minus_sigmoid(fake_logits).mean()

    if reals is None or reals.ndim == 0 or reals.shape[0] == 0:
        raise ShapeError("discriminator loss needs a non-empty real batch")
    real_logits = judge(reals)
    fake_logits = judge(fakes.detach())
    if mode == Constants.ADV_LEAST_SQUARES:
        return square(real_logits - 1.0).mean() + square(fake_logits).mean()
    return -(_log_sigmoid(real_logits).mean() + _log_one_minus_sigmoid(fake_logits).mean())


def cycle_loss(G_X: NetLike, G_Y: NetLike, batch_x: Tensor, norm: str = "l2") -> Tensor:
    """x -> G_Y -> G_X -> x reconstruction; call with roles swapped for domain Y."""
    return reconstruction(as_mapping(G_X)(as_mapping(G_Y)(batch_x)), batch_x, norm)


def _check_triplets(triplets: TripletBatch) -> None:
    if len(triplets) == 0:
        raise ShapeError("temporal losses need at least one triplet")


def recurrent_loss(P: NetLike, triplets: TripletBatch, norm: str = "l2") -> Tensor:
    """x_{t+1} against P(x_{t-1}, x_t)."""
    _check_triplets(triplets)
    return reconstruction(as_predictor(P)(triplets.prev, triplets.curr), triplets.next, norm)


def recycle_loss(
    G_X: NetLike, G_Y: NetLike, P_Y: NetLike, triplets_x: TripletBatch, norm: str = "l2"
) -> Tensor:
    """x_{t+1} against G_X(P_Y(G_Y(x_{t-1}), G_Y(x_t)))."""
    _check_triplets(triplets_x)
    g_y = as_mapping(G_Y)
    predicted = as_predictor(P_Y)(g_y(triplets_x.prev), g_y(triplets_x.curr))
    return reconstruction(as_mapping(G_X)(predicted), triplets_x.next, norm)


@dataclass
class ObjectiveTerms:
    """Tensor-valued terms of one objective evaluation plus the translated frames."""

    terms: Dict[str, Tensor]
    total: Tensor
    fake_x: Tensor
    fake_y: Tensor
    weights_used: Dict[str, float] = field(default_factory=dict)

    def report(self) -> LossReport:
        values = {name: term.item() for name, term in self.terms.items()}
        return LossReport(total=self.total.item(), **values)


def compose_objective(
    nets: Dict[str, NetLike],
    batch_x: TripletBatch,
    batch_y: TripletBatch,
    weights: LossWeights,
    include_cycle: bool = False,
    include_recycle: bool = True,
    mode: str = Constants.ADV_LEAST_SQUARES,
    norm: str = "l2",
    fakes: Optional[Tuple[Tensor, Tensor]] = None,
) -> ObjectiveTerms:
    """
    Generator-side objective: both adversarial terms, then the weighted
    recycle and recurrent terms, then (``include_cycle``) the weighted cycle
    terms, summed in that order.

    ``fakes`` passes in already computed (G_X(y_t), G_Y(x_t)) from the same tape.
    """
    _check_triplets(batch_x)
    _check_triplets(batch_y)
    g_x = as_mapping(nets[Constants.NET_G_X])
    g_y = as_mapping(nets[Constants.NET_G_Y])

    x_curr, y_curr = batch_x.curr, batch_y.curr
    if fakes is None:
        fake_x, fake_y = g_x(y_curr), g_y(x_curr)
    else:
        fake_x, fake_y = fakes

    terms: Dict[str, Tensor] = {
        "adv_X": adversarial_loss(nets[Constants.NET_D_X], None, fake_x, mode, side="generator"),
        "adv_Y": adversarial_loss(nets[Constants.NET_D_Y], None, fake_y, mode, side="generator"),
    }
    weighted = {"adv_X": weights.adversarial, "adv_Y": weights.adversarial}

    if include_recycle:
        p_x = as_predictor(nets[Constants.NET_P_X])
        p_y = as_predictor(nets[Constants.NET_P_Y])
        predicted_y = p_y(g_y(batch_x.prev), fake_y)
        predicted_x = p_x(g_x(batch_y.prev), fake_x)
        terms["recycle_X"] = reconstruction(g_x(predicted_y), batch_x.next, norm)
        terms["recycle_Y"] = reconstruction(g_y(predicted_x), batch_y.next, norm)
        terms["recurrent_X"] = reconstruction(p_x(batch_x.prev, x_curr), batch_x.next, norm)
        terms["recurrent_Y"] = reconstruction(p_y(batch_y.prev, y_curr), batch_y.next, norm)
        weighted.update(
            recycle_X=weights.lambda_rx,
            recycle_Y=weights.lambda_ry,
            recurrent_X=weights.lambda_tau_x,
            recurrent_Y=weights.lambda_tau_y,
        )

    if include_cycle:
        terms["cycle_X"] = reconstruction(g_x(fake_y), x_curr, norm)
        terms["cycle_Y"] = reconstruction(g_y(fake_x), y_curr, norm)
        weighted.update(cycle_X=weights.lambda_cycle_x, cycle_Y=weights.lambda_cycle_y)

    total: Optional[Tensor] = None
    for name, term in terms.items():
        contribution = scale(term, weighted[name])
        total = contribution if total is None else total + contribution
    return ObjectiveTerms(terms=terms, total=total, fake_x=fake_x, fake_y=fake_y, weights_used=weighted)


def total_objective(
    nets: Dict[str, NetLike],
    batch_x: TripletBatch,
    batch_y: TripletBatch,
    weights: LossWeights,
    include_cycle: bool = False,
    include_recycle: bool = True,
    mode: str = Constants.ADV_LEAST_SQUARES,
    norm: str = "l2",
) -> LossReport:
    """Evaluate the combined objective and report every term with the weighted total."""
    return compose_objective(
        nets, batch_x, batch_y, weights, include_cycle, include_recycle, mode, norm
    ).report()
