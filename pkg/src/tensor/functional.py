"""Normalization, resizing and loss primitives built on the tape."""

from typing import Optional, Tuple

import numpy as np

from src.core.constants import Constants
from src.core.errors import ShapeError
from src.tensor.tensor import Tensor, make_result


def instance_norm(
    x: Tensor,
    weight: Optional[Tensor] = None,
    bias: Optional[Tensor] = None,
    eps: float = Constants.NORM_EPS,
) -> Tensor:
    """Per-sample, per-channel normalization over H and W with optional affine."""
    if x.ndim != 4:
        raise ShapeError(f"instance_norm expects [N,C,H,W], got {x.shape}")
    channels = x.shape[1]
    for param, label in ((weight, "weight"), (bias, "bias")):
        if param is not None and param.shape != (channels,):
            raise ShapeError(f"instance_norm {label} shape {param.shape} != ({channels},)")

    data = x.data
    mean = data.mean(axis=(2, 3), keepdims=True)
    centered = data - mean
    var = (centered * centered).mean(axis=(2, 3), keepdims=True)
    inv_std = 1.0 / np.sqrt(var + data.dtype.type(eps))
    normalized = centered * inv_std

    gamma = weight.data.reshape(1, channels, 1, 1) if weight is not None else None
    out = normalized * gamma if gamma is not None else normalized
    if bias is not None:
        out = out + bias.data.reshape(1, channels, 1, 1)

    def _backward(g: np.ndarray):
        g_norm = g * gamma if gamma is not None else g
        mean_g = g_norm.mean(axis=(2, 3), keepdims=True)
        mean_gx = (g_norm * normalized).mean(axis=(2, 3), keepdims=True)
        grads = [inv_std * (g_norm - mean_g - normalized * mean_gx)]
        if weight is not None:
            grads.append((g * normalized).sum(axis=(0, 2, 3)))
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    inputs = tuple(t for t in (x, weight, bias) if t is not None)
    return make_result("instance_norm", out, inputs, _backward)


def _interpolation_matrix(size_in: int, size_out: int, mode: str, dtype: np.dtype) -> np.ndarray:
    """Row i holds the weights of input pixels feeding output pixel i (half-pixel centers)."""
    matrix = np.zeros((size_out, size_in), dtype=dtype)
    ratio = size_in / size_out
    for i in range(size_out):
        if mode == "nearest":
            matrix[i, min(int(np.floor(i * ratio)), size_in - 1)] = 1.0
            continue
        src = max((i + 0.5) * ratio - 0.5, 0.0)
        lo = min(int(np.floor(src)), size_in - 1)
        hi = min(lo + 1, size_in - 1)
        frac = src - lo
        matrix[i, lo] += 1.0 - frac
        matrix[i, hi] += frac
    return matrix


def _separable(data: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    tmp = np.tensordot(data, cols, axes=([3], [1]))  # N, C, H, W'
    out = np.tensordot(rows, tmp, axes=([1], [2]))  # H', N, C, W'
    return np.ascontiguousarray(out.transpose(1, 2, 0, 3))


def resize(x: Tensor, size: Tuple[int, int], mode: str = "nearest") -> Tensor:
    """Resize [N,C,H,W] to ``size`` with nearest or bilinear sampling."""
    if mode not in ("nearest", "bilinear"):
        raise ValueError(f"Unknown resize mode '{mode}'")
    if x.ndim != 4:
        raise ShapeError(f"resize expects [N,C,H,W], got {x.shape}")
    rows = _interpolation_matrix(x.shape[2], size[0], mode, x.dtype)
    cols = _interpolation_matrix(x.shape[3], size[1], mode, x.dtype)
    return make_result(
        f"resize_{mode}",
        _separable(x.data, rows, cols),
        (x,),
        lambda g: (_separable(g, rows.T, cols.T),),
    )


def squared_error(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared differences over every element."""
    if pred.shape != target.shape:
        raise ShapeError(f"squared_error shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    count = diff.size
    out = np.asarray((diff * diff).sum() / diff.dtype.type(count))

    def _backward(g: np.ndarray):
        grad = 2.0 * g * diff / count
        return [grad, -grad]

    return make_result("squared_error", out, (pred, target), _backward)


def l1_error(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of absolute differences over every element."""
    if pred.shape != target.shape:
        raise ShapeError(f"l1_error shape mismatch: {pred.shape} vs {target.shape}")
    diff = pred.data - target.data
    count = diff.size
    out = np.asarray(np.abs(diff).sum() / diff.dtype.type(count))

    def _backward(g: np.ndarray):
        grad = g * np.sign(diff) / count
        return [grad, -grad]

    return make_result("l1_error", out, (pred, target), _backward)


def log_softmax(logits: Tensor, axis: int = 1) -> Tensor:
    shifted = logits.data - logits.data.max(axis=axis, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=axis, keepdims=True))
    out = shifted - log_norm
    probs = np.exp(out)

    def _backward(g: np.ndarray):
        return [g - probs * g.sum(axis=axis, keepdims=True)]

    return make_result("log_softmax", out, (logits,), _backward)


def cross_entropy(logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean per-pixel softmax cross-entropy of [N,K,H,W] logits against [N,H,W] ids."""
    labels = np.asarray(labels)
    n, k = logits.shape[0], logits.shape[1]
    if labels.shape != (n,) + logits.shape[2:]:
        raise ShapeError(f"labels shape {labels.shape} does not match logits {logits.shape}")
    if labels.size and (labels.min() < 0 or labels.max() >= k):
        raise ShapeError(f"label ids must lie in [0, {k}), got [{labels.min()}, {labels.max()}]")

    log_probs = log_softmax(logits, axis=1)
    onehot = np.moveaxis(np.eye(k, dtype=logits.dtype)[labels], -1, 1)
    picked = (log_probs * Tensor(onehot)).sum(axis=1)
    return -picked.mean()
