"""Parameter-spec builders and their forward counterparts, shared by every architecture."""

from typing import Any, List

from src.nn.base import ParamSpec
from src.tensor import Tensor, conv2d, conv_transpose2d, instance_norm


def conv_specs(prefix: str, out_ch: int, in_ch: int, kernel: int, bias: bool) -> List[ParamSpec]:
    specs = [ParamSpec(f"{prefix}.weight", (out_ch, in_ch, kernel, kernel), "kernel")]
    if bias:
        specs.append(ParamSpec(f"{prefix}.bias", (out_ch,), "bias"))
    return specs


def conv_transpose_specs(prefix: str, in_ch: int, out_ch: int, kernel: int, bias: bool) -> List[ParamSpec]:
    specs = [ParamSpec(f"{prefix}.weight", (in_ch, out_ch, kernel, kernel), "kernel")]
    if bias:
        specs.append(ParamSpec(f"{prefix}.bias", (out_ch,), "bias"))
    return specs


def norm_specs(prefix: str, channels: int) -> List[ParamSpec]:
    return [
        ParamSpec(f"{prefix}.weight", (channels,), "norm_weight"),
        ParamSpec(f"{prefix}.bias", (channels,), "norm_bias"),
    ]


def _bias(params: Any, prefix: str):
    key = f"{prefix}.bias"
    return params[key] if key in params else None


def conv(params: Any, prefix: str, x: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    return conv2d(x, params[f"{prefix}.weight"], _bias(params, prefix), stride=stride, padding=padding)


def conv_transpose(params: Any, prefix: str, x: Tensor, stride: int = 1, padding: int = 0) -> Tensor:
    return conv_transpose2d(x, params[f"{prefix}.weight"], _bias(params, prefix), stride=stride, padding=padding)


def norm(params: Any, prefix: str, x: Tensor) -> Tensor:
    return instance_norm(x, params[f"{prefix}.weight"], params[f"{prefix}.bias"])
