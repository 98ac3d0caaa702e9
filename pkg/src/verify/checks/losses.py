"""Exact identities of the objective terms and their parameter gradients."""

import math
from typing import Dict, List, Tuple

import numpy as np

from src.core.constants import Constants
from src.data.stream import TripletBatch, VideoStream, sample_triplets
from src.losses.objective import (
    adversarial_loss,
    as_mapping,
    compose_objective,
    cycle_loss,
    recurrent_loss,
    recycle_loss,
)
from src.models.config import DiscriminatorConfig, GeneratorConfig, LossWeights, UNetConfig
from src.models.reports import CheckResult
from src.nn import NetworkParams
from src.tensor import Tensor
from src.verify.base import AbstractCheck
from src.verify.probes import parameter_gradient_check, random_params

SIZE = 8
CHANNELS = 2
FRAMES = 6


def tiny_nets(rng: np.random.Generator) -> Dict[str, NetworkParams]:
    generator = GeneratorConfig(
        input_channels=CHANNELS, base_width=2, n_residual_blocks=1, image_size=SIZE, precision="float64"
    )
    discriminator = DiscriminatorConfig(
        input_channels=CHANNELS, base_width=2, n_layers=0, image_size=SIZE, precision="float64"
    )
    predictor = UNetConfig(
        input_channels=2 * CHANNELS, output_channels=CHANNELS, base_width=2, image_size=SIZE, precision="float64"
    )
    descriptors = {
        Constants.NET_G_X: generator,
        Constants.NET_G_Y: generator,
        Constants.NET_D_X: discriminator,
        Constants.NET_D_Y: discriminator,
        Constants.NET_P_X: predictor,
        Constants.NET_P_Y: predictor,
    }
    return {net: random_params(descriptors[net], rng, name=net) for net in Constants.ALL_NETS}


def tiny_batches(rng: np.random.Generator) -> Tuple[TripletBatch, TripletBatch]:
    shape = (FRAMES, CHANNELS, SIZE, SIZE)
    stream_x = VideoStream(Constants.DOMAIN_X, rng.uniform(-1.0, 1.0, size=shape))
    stream_y = VideoStream(Constants.DOMAIN_Y, rng.uniform(-1.0, 1.0, size=shape))
    return sample_triplets(stream_x, 2, rng), sample_triplets(stream_y, 2, rng)


def linear_stream(rng: np.random.Generator) -> TripletBatch:
    """Frames a + t*b, which 2*x_t - x_{t-1} predicts exactly."""
    a = rng.uniform(-0.5, 0.5, size=(CHANNELS, SIZE, SIZE))
    b = rng.uniform(-0.05, 0.05, size=(CHANNELS, SIZE, SIZE))
    frames = np.stack([a + t * b for t in range(FRAMES)])
    return sample_triplets(VideoStream(Constants.DOMAIN_X, frames), 3, rng)


def identity(x: Tensor) -> Tensor:
    return x


def swap_roles(nets: Dict[str, NetworkParams]) -> Dict[str, NetworkParams]:
    pairs = {
        Constants.NET_G_X: Constants.NET_G_Y,
        Constants.NET_G_Y: Constants.NET_G_X,
        Constants.NET_D_X: Constants.NET_D_Y,
        Constants.NET_D_Y: Constants.NET_D_X,
        Constants.NET_P_X: Constants.NET_P_Y,
        Constants.NET_P_Y: Constants.NET_P_X,
    }
    return {net: nets[pairs[net]] for net in nets}


class LossIdentityCheck(AbstractCheck):
    name = "loss_identities"
    description = "zero optima, reductions and linearity of the objective at 64-bit"
    tolerance = 1e-12

    def cases(self) -> List[str]:
        return [
            "cycle_exact_inverses",
            "recycle_perfect_predictor",
            "recycle_equals_recurrent",
            "least_squares_optimum",
            "log_mode_chance",
            "zero_weights_leave_adversarial",
            "total_recomputed",
            "domain_symmetry",
        ]

    def run_case(self, case: str) -> CheckResult:
        rng = np.random.default_rng([self.seed, self.cases().index(case)])

        if case == "cycle_exact_inverses":
            batch = Tensor(rng.uniform(-1.0, 1.0, size=(2, CHANNELS, SIZE, SIZE)))
            value = cycle_loss(lambda x: x * 0.5, lambda x: x * 2.0, batch).item()
            return self.below(case, abs(value))

        if case == "recycle_perfect_predictor":
            triplets = linear_stream(rng)
            value = recycle_loss(identity, identity, lambda prev, curr: curr * 2.0 - prev, triplets).item()
            return self.below(case, abs(value))

        if case == "recycle_equals_recurrent":
            nets = tiny_nets(rng)
            triplets, _ = tiny_batches(rng)
            predictor = nets[Constants.NET_P_Y]
            recycle = recycle_loss(identity, identity, predictor, triplets).item()
            recurrent = recurrent_loss(predictor, triplets).item()
            return self.below(case, abs(recycle - recurrent))

        if case == "least_squares_optimum":
            reals = Tensor(np.ones((2, 1, SIZE, SIZE)))
            fakes = Tensor(np.zeros((2, 1, SIZE, SIZE)))
            value = adversarial_loss(identity, reals, fakes, Constants.ADV_LEAST_SQUARES).item()
            return self.below(case, abs(value))

        if case == "log_mode_chance":
            zeros = Tensor(np.zeros((1, 1, 1, 1)))
            value = adversarial_loss(lambda x: x * 0.0, zeros, zeros, Constants.ADV_LOG).item()
            return self.below(case, abs(value - 2.0 * math.log(2.0)))

        nets = tiny_nets(rng)
        batch_x, batch_y = tiny_batches(rng)

        if case == "zero_weights_leave_adversarial":
            zero = LossWeights(
                lambda_rx=0, lambda_ry=0, lambda_tau_x=0, lambda_tau_y=0, lambda_cycle_x=0, lambda_cycle_y=0
            )
            report = compose_objective(nets, batch_x, batch_y, zero, include_cycle=True).report()
            return self.below(case, abs(report.total - (report.adv_X + report.adv_Y)))

        weights = LossWeights(
            lambda_rx=rng.uniform(0, 10),
            lambda_ry=rng.uniform(0, 10),
            lambda_tau_x=rng.uniform(0, 10),
            lambda_tau_y=rng.uniform(0, 10),
            lambda_cycle_x=rng.uniform(0, 10),
            lambda_cycle_y=rng.uniform(0, 10),
        )
        objective = compose_objective(nets, batch_x, batch_y, weights, include_cycle=True)

        if case == "total_recomputed":
            recomputed = sum(objective.weights_used[name] * term.item() for name, term in objective.terms.items())
            return self.below(case, abs(objective.total.item() - recomputed) / max(abs(recomputed), 1.0))

        swapped = compose_objective(swap_roles(nets), batch_y, batch_x, weights.swapped(), include_cycle=True)
        a, b = objective.total.item(), swapped.total.item()
        return self.below(case, abs(a - b) / max(abs(a), 1.0))


class LossGradientCheck(AbstractCheck):
    name = "loss_gradients"
    description = "gradient of every term with respect to every participating network"
    tolerance = 1e-4

    PARTICIPANTS = {
        "adversarial_discriminator": (Constants.NET_D_Y,),
        "adversarial_log_generator": (Constants.NET_G_Y, Constants.NET_D_Y),
        "cycle": (Constants.NET_G_X, Constants.NET_G_Y),
        "recurrent": (Constants.NET_P_X,),
        "recycle": (Constants.NET_G_X, Constants.NET_G_Y, Constants.NET_P_Y),
        "combined_objective": Constants.ALL_NETS,
    }

    def cases(self) -> List[str]:
        return list(self.PARTICIPANTS)

    @staticmethod
    def _term(case: str, nets: Dict[str, NetworkParams], batch_x: TripletBatch, batch_y: TripletBatch) -> Tensor:
        if case == "adversarial_discriminator":
            fakes = as_mapping(nets[Constants.NET_G_Y])(batch_x.curr)
            return adversarial_loss(nets[Constants.NET_D_Y], batch_y.curr, fakes)
        if case == "adversarial_log_generator":
            fakes = as_mapping(nets[Constants.NET_G_Y])(batch_x.curr)
            return adversarial_loss(nets[Constants.NET_D_Y], None, fakes, Constants.ADV_LOG, side="generator")
        if case == "cycle":
            return cycle_loss(nets[Constants.NET_G_X], nets[Constants.NET_G_Y], batch_x.curr)
        if case == "recurrent":
            return recurrent_loss(nets[Constants.NET_P_X], batch_x)
        if case == "recycle":
            return recycle_loss(nets[Constants.NET_G_X], nets[Constants.NET_G_Y], nets[Constants.NET_P_Y], batch_x)
        return compose_objective(nets, batch_x, batch_y, LossWeights(), include_cycle=True).total

    def run_case(self, case: str) -> CheckResult:
        rng = np.random.default_rng([self.seed, self.cases().index(case)])
        nets = tiny_nets(rng)
        batch_x, batch_y = tiny_batches(rng)
        per_tensor = 1 if case == "combined_objective" else 2

        worst_error, worst_where = 0.0, ""
        for net in self.PARTICIPANTS[case]:

            def loss_of(params: NetworkParams, net: str = net) -> Tensor:
                return self._term(case, {**nets, net: params}, batch_x, batch_y)

            result, key = parameter_gradient_check(loss_of, nets[net], rng, per_tensor=per_tensor)
            where = f"{net}.{key} coordinate {result.worst_index}"
            if not result.finite:
                return self.expect(case, False, f"{result.message} ({where})")
            if result.message:
                where = f"{net}.{key}: {result.message}"
            if result.max_relative_error >= worst_error:
                worst_error, worst_where = result.max_relative_error, where
        for params in nets.values():
            params.clear_grad()

        message = ""
        if worst_error >= self.tolerance:
            message = f"relative error {worst_error:.3e} at {worst_where}"
        return self.below(case, worst_error, message=message)
