"""Shared building blocks of the verification checks."""

from collections import OrderedDict
from typing import Callable, Optional, Tuple

import numpy as np

from src.models.config import DiscriminatorConfig
from src.nn import NetworkParams, parameter_specs
from src.nn.params import Descriptor
from src.tensor import GradCheckResult, GradTape, Tensor, conv2d, gradient_check, leaky_relu

# verification parameters are drawn wider than the training init so no
# gradient component sits in the rounding noise
PROBE_STD = 0.5
# replacement draws per tensor when sampled coordinates sit on kinks
MAX_DRAWS = 8


def random_params(descriptor: Descriptor, rng: np.random.Generator, name: Optional[str] = None) -> NetworkParams:
    arrays = OrderedDict()
    for spec in parameter_specs(descriptor):
        if spec.role == "norm_weight":
            arrays[spec.name] = rng.uniform(0.5, 1.5, size=spec.shape)
        else:
            arrays[spec.name] = rng.normal(0.0, PROBE_STD, size=spec.shape)
    return NetworkParams.from_arrays(descriptor, arrays, name=name)


def with_tensor(params: NetworkParams, key: str, tensor: Tensor) -> NetworkParams:
    """The same parameter set with ``key`` bound to ``tensor``."""
    tensors = OrderedDict(params.items())
    tensors[key] = tensor
    return NetworkParams(params.descriptor, tensors, name=params.name)


def sampled_gradient_check(
    f: Callable[[Tensor], Tensor], tensor: Tensor, rng: np.random.Generator, per_tensor: int, eps: float
) -> GradCheckResult:
    """Check ``per_tensor`` coordinates, drawing replacements for the ones that sit on kinks."""
    order = [int(c) for c in rng.permutation(tensor.size)][: per_tensor * MAX_DRAWS]
    worst: Optional[GradCheckResult] = None
    checked = skipped = 0
    for start in range(0, len(order), per_tensor):
        coords = order[start : start + per_tensor]
        result = gradient_check(f, tensor, eps=eps, coords=coords, skip_kinks=True)
        if not result.finite:
            return result
        skipped += result.skipped
        if result.checked:
            checked += result.checked
            if worst is None or result.max_relative_error > worst.max_relative_error:
                worst = result
        if checked >= per_tensor:
            break
    if worst is None:
        message = f"all {skipped} sampled coordinates sit on kinks"
        return GradCheckResult(float("inf"), skipped=skipped, message=message)
    worst.checked, worst.skipped = checked, skipped
    return worst


def parameter_gradient_check(
    loss_of: Callable[[NetworkParams], Tensor],
    params: NetworkParams,
    rng: np.random.Generator,
    per_tensor: int = 2,
    eps: float = 1e-5,
) -> Tuple[GradCheckResult, Optional[str]]:
    """
    Gradient check of ``loss_of`` over a few sampled coordinates of every
    parameter tensor. Returns the worst result and the tensor it belongs to.
    """
    worst: Optional[GradCheckResult] = None
    worst_key: Optional[str] = None
    for key, tensor in list(params.items()):
        result = sampled_gradient_check(
            lambda t, key=key: loss_of(with_tensor(params, key, t)), tensor, rng, per_tensor, eps
        )
        if not result.finite:
            return result, key
        if worst is None or result.max_relative_error > worst.max_relative_error:
            worst, worst_key = result, key
    params.clear_grad()
    return worst or GradCheckResult(0.0), worst_key


def conv_stack_support(config: DiscriminatorConfig, size: int, rng: np.random.Generator) -> Tuple[int, int]:
    """
    Height and width of the input region that influences the central logit of
    the discriminator's convolution stack (padding 0, normalization left out,
    since it couples every pixel of a channel).
    """
    kernels = [rng.normal(0.0, PROBE_STD, size=(out_ch, in_ch, k, k)) for in_ch, out_ch, k, _ in config.layer_specs]
    x = Tensor(rng.normal(size=(1, config.input_channels, size, size)), requires_grad=True)
    with GradTape() as tape:
        h = x
        for i, ((_, _, _, stride), kernel) in enumerate(zip(config.layer_specs, kernels)):
            h = conv2d(h, Tensor(kernel), stride=stride, padding=0)
            if i < len(kernels) - 1:
                h = leaky_relu(h, 0.2)
        centre = (h.shape[2] // 2, h.shape[3] // 2)
        logit = h[:, :, centre[0], centre[1]].sum()
        tape.backward(logit, inputs=[x])
    support = np.abs(x.grad[0]).sum(axis=0) > 0
    rows = np.flatnonzero(support.any(axis=1))
    cols = np.flatnonzero(support.any(axis=0))
    if rows.size == 0:
        return 0, 0
    return int(rows[-1] - rows[0] + 1), int(cols[-1] - cols[0] + 1)
