import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple, Union

import numpy as np

from src.core.constants import Constants
from src.core.errors import NumericalError, ShapeError
from src.nn import NetworkParams
from src.tensor import Tensor

logger = logging.getLogger(__name__)

ParamSet = Union[NetworkParams, Mapping[str, Tensor]]


@dataclass
class AdamState:
    """First and second moment buffers of one network plus its update count."""

    m: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    v: "OrderedDict[str, np.ndarray]" = field(default_factory=OrderedDict)
    t: int = 0

    @classmethod
    def zeros_like(cls, params: ParamSet) -> "AdamState":
        return cls(
            m=OrderedDict((k, np.zeros_like(t.data)) for k, t in params.items()),
            v=OrderedDict((k, np.zeros_like(t.data)) for k, t in params.items()),
        )

    def check_matches(self, params: ParamSet) -> None:
        for key, tensor in params.items():
            for label, buffers in (("m", self.m), ("v", self.v)):
                if key not in buffers or buffers[key].shape != tensor.shape:
                    found = buffers[key].shape if key in buffers else None
                    raise ShapeError(f"moment buffer {label}[{key}] has shape {found}, parameter {tensor.shape}")


def adam_update(
    params: ParamSet,
    grads: Optional[Mapping[str, np.ndarray]],
    moments: AdamState,
    lr: float,
    betas: Tuple[float, float] = (0.5, 0.999),
    eps: float = Constants.ADAM_EPS,
) -> Tuple[ParamSet, AdamState]:
    """
    Bias-corrected adaptive moment step, applied in place.

    ``grads`` defaults to the ``grad`` buffers of ``params``. Every gradient is
    checked before anything changes; a non-finite one rejects the whole step.
    """
    if grads is None:
        grads = OrderedDict((k, t.grad) for k, t in params.items())
    moments.check_matches(params)

    resolved: Dict[str, np.ndarray] = OrderedDict()
    for key, tensor in params.items():
        grad = grads.get(key)
        grad = np.zeros_like(tensor.data) if grad is None else np.asarray(grad, dtype=tensor.dtype)
        if grad.shape != tensor.shape:
            raise ShapeError(f"gradient for {key} has shape {grad.shape}, parameter {tensor.shape}")
        if not np.all(np.isfinite(grad)):
            name = getattr(params, "name", None)
            owner = f"{name}." if name else ""
            raise NumericalError(f"non-finite gradient for parameter {owner}{key}; step rejected")
        resolved[key] = grad

    beta1, beta2 = betas
    moments.t += 1
    correction1 = 1.0 - beta1**moments.t
    correction2 = 1.0 - beta2**moments.t
    for key, tensor in params.items():
        grad = resolved[key]
        dtype = tensor.dtype.type
        m = dtype(beta1) * moments.m[key] + dtype(1.0 - beta1) * grad
        v = dtype(beta2) * moments.v[key] + dtype(1.0 - beta2) * grad * grad
        moments.m[key] = m
        moments.v[key] = v
        m_hat = m / dtype(correction1)
        v_hat = v / dtype(correction2)
        tensor.data = tensor.data - dtype(lr) * m_hat / (np.sqrt(v_hat) + dtype(eps))
    return params, moments
