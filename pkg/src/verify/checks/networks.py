"""Gradient checks through each full network, with respect to inputs and parameters."""

from typing import Callable, Dict, List, Tuple

import numpy as np

from src.models.config import DiscriminatorConfig, GeneratorConfig, UNetConfig
from src.models.reports import CheckResult
from src.nn import NetworkParams, discriminator_forward, generator_forward, predictor_forward, segmenter_forward
from src.tensor import GradTape, Tensor, cross_entropy, gradient_check, reduce_sum
from src.verify.base import AbstractCheck
from src.verify.probes import parameter_gradient_check, random_params

SIZE = 8
CHANNELS = 2


def tiny_descriptors() -> Dict[str, object]:
    return {
        "generator": GeneratorConfig(
            input_channels=CHANNELS, base_width=2, n_residual_blocks=1, image_size=SIZE, precision="float64"
        ),
        "discriminator": DiscriminatorConfig(
            input_channels=CHANNELS, base_width=2, n_layers=1, image_size=2 * SIZE, precision="float64"
        ),
        "predictor": UNetConfig(
            input_channels=2 * CHANNELS, output_channels=CHANNELS, base_width=2, image_size=SIZE, precision="float64"
        ),
        "segmenter": UNetConfig(
            input_channels=CHANNELS,
            output_channels=3,
            base_width=2,
            image_size=SIZE,
            final_activation="none",
            precision="float64",
        ),
    }


class NetworkGradientCheck(AbstractCheck):
    """
    Tiny float64 instances of every architecture. The discriminator here has a
    single strided layer at 16x16; the full-depth 70x70 PatchGAN is checked by
    the slow tests.
    """

    name = "network_gradients"
    description = "generator, discriminator, predictor and segmenter against central differences"
    tolerance = 1e-4

    NETWORKS = ("generator", "discriminator", "predictor", "segmenter")

    def cases(self) -> List[str]:
        return [f"{net}_{wrt}" for net in self.NETWORKS for wrt in ("input", "params")] + ["predictor_skip_path"]

    def _setup(self, net: str) -> Tuple[NetworkParams, Callable[[NetworkParams, Tensor], Tensor], np.ndarray]:
        rng = np.random.default_rng([self.seed, self.NETWORKS.index(net)])
        descriptor = tiny_descriptors()[net]
        params = random_params(descriptor, rng, name=net)
        size = descriptor.image_size
        x = rng.uniform(-1.0, 1.0, size=(2, CHANNELS, size, size))

        if net == "segmenter":
            labels = rng.integers(0, 3, size=(2, size, size))
            return params, (lambda p, t: cross_entropy(segmenter_forward(p, t), labels)), x

        if net == "predictor":
            curr = Tensor(rng.uniform(-1.0, 1.0, size=x.shape))

            def forward(p: NetworkParams, t: Tensor) -> Tensor:
                return predictor_forward(p, t, curr)

        else:
            forward = generator_forward if net == "generator" else discriminator_forward
        out_shape = forward(params, Tensor(x)).shape
        w = Tensor(rng.normal(size=out_shape))
        return params, (lambda p, t: reduce_sum(forward(p, t) * w)), x

    def _skip_path(self, case: str) -> CheckResult:
        rng = np.random.default_rng([self.seed, 99])
        params = random_params(tiny_descriptors()["predictor"], rng)
        prev = Tensor(rng.uniform(-1.0, 1.0, size=(1, CHANNELS, SIZE, SIZE)), requires_grad=True)
        curr = Tensor(rng.uniform(-1.0, 1.0, size=prev.shape))
        with GradTape() as tape:
            out = predictor_forward(params, prev, curr, zero_bottleneck=True)
            tape.backward(out.sum(), inputs=[prev])
        params.clear_grad()
        magnitude = float(np.abs(prev.grad).sum())
        return self.expect(
            case, magnitude > 0, "output does not depend on the input once the bottleneck is zeroed", magnitude
        )

    def run_case(self, case: str) -> CheckResult:
        if case == "predictor_skip_path":
            return self._skip_path(case)
        net, wrt = case.rsplit("_", 1)
        params, loss, x = self._setup(net)
        if wrt == "input":
            result = gradient_check(lambda t: loss(params, t), Tensor(x), skip_kinks=True)
            params.clear_grad()
            where = f"input coordinate {result.worst_index}"
        else:
            rng = np.random.default_rng([self.seed, 7])
            fixed = Tensor(x)
            result, key = parameter_gradient_check(lambda p: loss(p, fixed), params, rng)
            where = f"parameter {key} coordinate {result.worst_index}"
        if not result.finite:
            return self.expect(case, False, f"{result.message} ({where})")
        message = f"{result.message} ({where})" if result.message else ""
        if result.max_relative_error >= self.tolerance and not message:
            message = f"relative error {result.max_relative_error:.3e} at {where}"
        return self.below(case, result.max_relative_error, message=message)
