from src.nn.base import AbstractNetwork, ParamSpec
from src.nn.params import NetworkParams, init_params, parameter_count, parameter_specs
from src.nn.registry import NetworkRegistry, network_registry

# Discover and register all networks
network_registry.discover_and_register_networks()

from src.nn.forward import (  # noqa: E402
    discriminator_forward,
    generator_forward,
    predictor_forward,
    receptive_field,
    segmenter_forward,
)

__all__ = [
    "AbstractNetwork",
    "ParamSpec",
    "NetworkParams",
    "NetworkRegistry",
    "network_registry",
    "init_params",
    "parameter_count",
    "parameter_specs",
    "generator_forward",
    "discriminator_forward",
    "predictor_forward",
    "segmenter_forward",
    "receptive_field",
]
