"""Forward passes of the four network roles, validated against their descriptors."""

from typing import Optional

from src.core.errors import ConfigError, ShapeError
from src.models.config import DiscriminatorConfig, GeneratorConfig, UNetConfig
from src.nn.params import NetworkParams
from src.nn.registry import network_registry
from src.tensor import Tensor, concat


def _expect(params: NetworkParams, config_type: type, role: str) -> None:
    if not isinstance(params.descriptor, config_type):
        raise ConfigError(
            f"{role} needs {config_type.__name__} parameters, got {type(params.descriptor).__name__}"
        )


def generator_forward(params: NetworkParams, image: Tensor) -> Tensor:
    _expect(params, GeneratorConfig, "generator_forward")
    return network_registry.get_network(params.descriptor).forward(params, image)


def discriminator_forward(params: NetworkParams, image: Tensor) -> Tensor:
    """Patch logits [N,1,h,w]; no sigmoid."""
    _expect(params, DiscriminatorConfig, "discriminator_forward")
    return network_registry.get_network(params.descriptor).forward(params, image)


def predictor_forward(
    params: NetworkParams, frame_prev: Tensor, frame_curr: Tensor, zero_bottleneck: bool = False
) -> Tensor:
    """Next-frame prediction from the channel concatenation of the last two frames."""
    _expect(params, UNetConfig, "predictor_forward")
    if frame_prev.shape != frame_curr.shape:
        raise ShapeError(f"predictor frames differ in shape: {frame_prev.shape} vs {frame_curr.shape}")
    network = network_registry.get_network(params.descriptor)
    return network.forward(params, concat([frame_prev, frame_curr], axis=1), zero_bottleneck=zero_bottleneck)


def segmenter_forward(params: NetworkParams, image: Tensor, n_classes: Optional[int] = None) -> Tensor:
    """Per-pixel class logits [N,K,H,W]."""
    _expect(params, UNetConfig, "segmenter_forward")
    k = params.descriptor.output_channels
    if n_classes is not None and n_classes != k:
        raise ShapeError(f"segmenter predicts {k} classes but the dataset has {n_classes}")
    return network_registry.get_network(params.descriptor).forward(params, image)


def receptive_field(config: DiscriminatorConfig) -> int:
    """r <- r + (k-1)*jump, jump <- jump*stride over the conv stack."""
    return config.receptive_field
