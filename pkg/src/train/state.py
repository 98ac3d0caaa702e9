"""Training state: six networks, their optimizer moments, history pools and the run's generator."""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np
from pydantic import ValidationError

from src.core.constants import Constants
from src.core.errors import CheckpointError
from src.models.config import TrainConfig
from src.nn import NetworkParams, init_params, parameter_specs
from src.storage.checkpoint import CheckpointData, read_checkpoint, write_checkpoint
from src.tensor import resolve_dtype
from src.train.image_pool import ImagePool
from src.train.optimizer import AdamState

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

STATE_KIND = "train_state"


def descriptor_for(config: TrainConfig, net: str):
    if net in (Constants.NET_G_X, Constants.NET_G_Y):
        return config.generator_config()
    if net in (Constants.NET_D_X, Constants.NET_D_Y):
        return config.discriminator_config()
    return config.predictor_config()


@dataclass
class TrainState:
    config: TrainConfig
    nets: "OrderedDict[str, NetworkParams]"
    moments: Dict[str, AdamState]
    pools: Dict[str, ImagePool]
    rng: np.random.Generator
    step: int = 0

    def __getitem__(self, net: str) -> NetworkParams:
        return self.nets[net]

    @property
    def frame_template(self) -> np.ndarray:
        size = self.config.image_size
        return np.zeros((1, self.config.channels, size, size), dtype=resolve_dtype(self.config.precision))


def init_train_state(config: TrainConfig) -> TrainState:
    """
    Fresh state from ``config.seed``: one child seed per network in a fixed
    order, and one more for the run generator that drives sampling and pools.
    """
    children = np.random.SeedSequence(config.seed).spawn(len(Constants.ALL_NETS) + 1)
    nets: "OrderedDict[str, NetworkParams]" = OrderedDict()
    for net, child in zip(Constants.ALL_NETS, children):
        seed = int(child.generate_state(1)[0])
        nets[net] = init_params(descriptor_for(config, net), seed, name=net)
    moments = {net: AdamState.zeros_like(params) for net, params in nets.items()}
    pools = {domain: ImagePool(config.pool_size) for domain in (Constants.DOMAIN_X, Constants.DOMAIN_Y)}
    rng = np.random.default_rng(children[-1])
    logger.debug(f"Initialized training state with seed {config.seed}")
    return TrainState(config=config, nets=nets, moments=moments, pools=pools, rng=rng)


def state_to_checkpoint(state: TrainState) -> CheckpointData:
    tensors: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for net, params in state.nets.items():
        for key, tensor in params.items():
            tensors[f"net/{net}/{key}"] = tensor.data
    for net, moments in state.moments.items():
        for key in state.nets[net]:
            tensors[f"adam/{net}/m/{key}"] = moments.m[key]
            tensors[f"adam/{net}/v/{key}"] = moments.v[key]
    template = state.frame_template
    for domain, pool in sorted(state.pools.items()):
        tensors[f"pool/{domain}"] = pool.as_array(template)
    header = {
        "kind": STATE_KIND,
        "config": state.config.model_dump(mode="json"),
        "adam_steps": {net: moments.t for net, moments in state.moments.items()},
    }
    return CheckpointData(
        header=header,
        tensors=tensors,
        rng_state=state.rng.bit_generator.state,
        step=state.step,
    )


def state_from_checkpoint(data: CheckpointData, source: str = "<checkpoint>") -> TrainState:
    if data.header.get("kind") != STATE_KIND:
        raise CheckpointError(f"{source} holds '{data.header.get('kind')}', not a training state")
    try:
        config = TrainConfig.model_validate(data.header["config"])
    except (KeyError, ValidationError) as e:
        raise CheckpointError(f"invalid training config in {source}: {e}") from e

    def tensor(name: str) -> np.ndarray:
        if name not in data.tensors:
            raise CheckpointError(f"checkpoint {source} is missing tensor {name}")
        return data.tensors[name]

    nets: "OrderedDict[str, NetworkParams]" = OrderedDict()
    moments: Dict[str, AdamState] = {}
    for net in Constants.ALL_NETS:
        descriptor = descriptor_for(config, net)
        fresh = [spec.name for spec in parameter_specs(descriptor)]
        arrays = OrderedDict((key, tensor(f"net/{net}/{key}")) for key in fresh)
        nets[net] = NetworkParams.from_arrays(descriptor, arrays, name=net)
        moments[net] = AdamState(
            m=OrderedDict((key, tensor(f"adam/{net}/m/{key}")) for key in fresh),
            v=OrderedDict((key, tensor(f"adam/{net}/v/{key}")) for key in fresh),
            t=int(data.header.get("adam_steps", {}).get(net, 0)),
        )
        moments[net].check_matches(nets[net])

    pools = {
        domain: ImagePool(config.pool_size, tensor(f"pool/{domain}"))
        for domain in (Constants.DOMAIN_X, Constants.DOMAIN_Y)
    }
    rng = np.random.default_rng()
    try:
        rng.bit_generator.state = data.rng_state
    except (TypeError, ValueError, KeyError) as e:
        raise CheckpointError(f"invalid rng state in {source}: {e}") from e
    return TrainState(config=config, nets=nets, moments=moments, pools=pools, rng=rng, step=data.step)


def save_checkpoint(state: TrainState, path: PathLike) -> Path:
    return write_checkpoint(path, state_to_checkpoint(state))


def load_checkpoint(path: PathLike) -> TrainState:
    return state_from_checkpoint(read_checkpoint(path), source=str(path))
