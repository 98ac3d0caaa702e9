"""Named parameter sets and their deterministic initialization."""

import logging
from collections import OrderedDict
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Union

import numpy as np

from src.core.errors import ShapeError
from src.models.config import DiscriminatorConfig, GeneratorConfig, UNetConfig
from src.nn.base import ParamSpec
from src.nn.registry import network_registry
from src.tensor import Tensor, resolve_dtype

logger = logging.getLogger(__name__)

Descriptor = Union[GeneratorConfig, DiscriminatorConfig, UNetConfig]

INIT_STD = 0.02


def parameter_specs(descriptor: Descriptor) -> List[ParamSpec]:
    return network_registry.get_network(descriptor).parameter_specs()


def parameter_count(descriptor: Descriptor) -> int:
    """Number of learnable scalars; a pure function of the descriptor."""
    return sum(spec.size for spec in parameter_specs(descriptor))


class NetworkParams:
    """Ordered, uniquely named tensors of one network plus its architecture descriptor."""

    def __init__(
        self,
        descriptor: Descriptor,
        tensors: Mapping[str, Tensor],
        name: Optional[str] = None,
    ):
        self.descriptor = descriptor
        self.name = name
        self._tensors: "OrderedDict[str, Tensor]" = OrderedDict()

        specs = parameter_specs(descriptor)
        expected = [spec.name for spec in specs]
        if list(tensors) != expected:
            missing = sorted(set(expected) - set(tensors))
            extra = sorted(set(tensors) - set(expected))
            raise ShapeError(
                f"parameters of {name or descriptor.kind} do not match the descriptor "
                f"(missing {missing}, unexpected {extra})"
            )
        for spec in specs:
            tensor = tensors[spec.name]
            if tensor.shape != spec.shape:
                raise ShapeError(f"parameter {spec.name} has shape {tensor.shape}, expected {spec.shape}")
            tensor.name = spec.name
            tensor.requires_grad = True
            self._tensors[spec.name] = tensor

    @classmethod
    def from_arrays(
        cls, descriptor: Descriptor, arrays: Mapping[str, np.ndarray], name: Optional[str] = None
    ) -> "NetworkParams":
        return cls(descriptor, OrderedDict((k, Tensor(np.array(v))) for k, v in arrays.items()), name=name)

    def __getitem__(self, key: str) -> Tensor:
        return self._tensors[key]

    def __contains__(self, key: str) -> bool:
        return key in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def __repr__(self) -> str:
        return f"NetworkParams({self.name or self.descriptor.kind}, tensors={len(self)}, count={self.count})"

    def items(self) -> Iterator[Tuple[str, Tensor]]:
        return iter(self._tensors.items())

    def tensors(self) -> List[Tensor]:
        return list(self._tensors.values())

    @property
    def count(self) -> int:
        return sum(t.size for t in self._tensors.values())

    @property
    def dtype(self) -> np.dtype:
        return next(iter(self._tensors.values())).dtype

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def clear_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.grad = None

    def numpy_state(self) -> Dict[str, np.ndarray]:
        return OrderedDict((k, t.data) for k, t in self._tensors.items())

    def copy(self) -> "NetworkParams":
        return NetworkParams.from_arrays(self.descriptor, self.numpy_state(), name=self.name)

    def assign(self, key: str, value: np.ndarray) -> None:
        """Replace the values of one tensor in place of the old array."""
        tensor = self._tensors[key]
        value = np.asarray(value, dtype=tensor.dtype)
        if value.shape != tensor.shape:
            raise ShapeError(f"cannot assign shape {value.shape} to parameter {key} of shape {tensor.shape}")
        tensor.data = value

    def equals(self, other: "NetworkParams") -> bool:
        """Bitwise equality of every tensor."""
        if list(self) != list(other):
            return False
        return all(
            a.dtype == b.dtype and np.array_equal(a.data, b.data)
            for a, b in zip(self.tensors(), other.tensors())
        )


def init_params(descriptor: Descriptor, seed: int, name: Optional[str] = None) -> NetworkParams:
    """
    Kernels ~ N(0, 0.02); norm gains 1; norm and conv biases 0.

    Values are drawn in parameter order from one generator seeded with ``seed``.
    """
    dtype = resolve_dtype(descriptor.precision)
    rng = np.random.default_rng(seed)
    tensors: "OrderedDict[str, Tensor]" = OrderedDict()
    for spec in parameter_specs(descriptor):
        if spec.role == "kernel":
            values = rng.normal(0.0, INIT_STD, size=spec.shape)
        elif spec.role == "norm_weight":
            values = np.ones(spec.shape)
        else:
            values = np.zeros(spec.shape)
        tensors[spec.name] = Tensor(values.astype(dtype))
    params = NetworkParams(descriptor, tensors, name=name)
    logger.debug(f"Initialized {params!r} with seed {seed}")
    return params
