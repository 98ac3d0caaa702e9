import abc
import logging
from dataclasses import dataclass
from typing import Any, List, Literal, Tuple

from src.tensor import Tensor

logger = logging.getLogger(__name__)

ParamRole = Literal["kernel", "bias", "norm_weight", "norm_bias"]


@dataclass(frozen=True)
class ParamSpec:
    """Name, shape and initialization role of one learnable tensor."""

    name: str
    shape: Tuple[int, ...]
    role: ParamRole

    @property
    def size(self) -> int:
        count = 1
        for dim in self.shape:
            count *= dim
        return count


class AbstractNetwork(abc.ABC):
    """
    Base interface for a network architecture.

    An architecture is described by a pydantic config whose ``kind`` field
    matches the class ``name``. The class knows two things about it: the
    ordered list of parameters the config implies, and how to run a forward
    pass given a ``NetworkParams`` holding those parameters. Networks carry no
    state of their own, so one instance may serve any number of parameter sets.
    """

    name: str = "abstract_network"

    def __init__(self, config: Any):
        """
        Args:
            config: Architecture descriptor (GeneratorConfig, DiscriminatorConfig, UNetConfig)
        """
        self.config = config

    @abc.abstractmethod
    def parameter_specs(self) -> List[ParamSpec]:
        """Parameters implied by the config, in a fixed order."""

    @abc.abstractmethod
    def forward(self, params: Any, *inputs: Tensor, **options: Any) -> Tensor:
        """Run the network on ``inputs``."""

    @abc.abstractmethod
    def validate_input(self, image: Tensor) -> None:
        """Raise ShapeError when ``image`` does not fit the config."""
