"""
2-D convolution and its adjoint (transposed convolution).

Both are built from three numpy kernels: windowed forward, input gradient
(col2im) and kernel gradient. The input gradient of ``conv2d`` is, verbatim,
the forward pass of ``conv_transpose2d``, which makes the pair exact adjoints.
Reductions go through ``np.tensordot`` and fixed-order loops over kernel taps,
so results are reproducible for a given build.
"""

from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.core.errors import ShapeError
from src.tensor.tensor import Tensor, make_result


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size + 2 * padding - kernel) // stride + 1


def conv_transpose_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    return (size - 1) * stride - 2 * padding + kernel


def _pad(x: np.ndarray, padding: int) -> np.ndarray:
    if padding == 0:
        return x
    return np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))


def _windows(x_padded: np.ndarray, kh: int, kw: int, stride: int) -> np.ndarray:
    """View of shape (N, C, H', W', kh, kw)."""
    win = sliding_window_view(x_padded, (kh, kw), axis=(2, 3))
    return win[:, :, ::stride, ::stride]


def _conv_forward(x: np.ndarray, w: np.ndarray, stride: int, padding: int) -> np.ndarray:
    win = _windows(_pad(x, padding), w.shape[2], w.shape[3], stride)
    out = np.tensordot(win, w, axes=([1, 4, 5], [1, 2, 3]))  # N, H', W', F
    return np.ascontiguousarray(out.transpose(0, 3, 1, 2))


def _conv_input_grad(
    g: np.ndarray, w: np.ndarray, x_shape: Tuple[int, ...], stride: int, padding: int
) -> np.ndarray:
    n, c, h, width = x_shape
    kh, kw = w.shape[2], w.shape[3]
    ho, wo = g.shape[2], g.shape[3]
    cols = np.tensordot(g, w, axes=([1], [0]))  # N, H', W', C, kh, kw
    grad = np.zeros((n, c, h + 2 * padding, width + 2 * padding), dtype=g.dtype)
    for i in range(kh):
        for j in range(kw):
            grad[:, :, i : i + stride * ho : stride, j : j + stride * wo : stride] += cols[
                :, :, :, :, i, j
            ].transpose(0, 3, 1, 2)
    return np.ascontiguousarray(grad[:, :, padding : padding + h, padding : padding + width])


def _conv_kernel_grad(
    g: np.ndarray, x: np.ndarray, kh: int, kw: int, stride: int, padding: int
) -> np.ndarray:
    win = _windows(_pad(x, padding), kh, kw, stride)
    ho, wo = g.shape[2], g.shape[3]
    win = win[:, :, :ho, :wo]
    return np.tensordot(g, win, axes=([0, 2, 3], [0, 2, 3]))  # F, C, kh, kw


def _check_common(input: Tensor, kernel: Tensor, bias: Optional[Tensor], stride: int, padding: int) -> None:
    if input.ndim != 4:
        raise ShapeError(f"input must be [N,C,H,W], got shape {input.shape}")
    if kernel.ndim != 4:
        raise ShapeError(f"kernel must be 4-D, got shape {kernel.shape}")
    if stride < 1:
        raise ShapeError(f"stride must be >= 1, got {stride}")
    if padding < 0:
        raise ShapeError(f"padding must be >= 0, got {padding}")


def conv2d(
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """Cross-correlation of ``input`` [N,C,H,W] with ``kernel`` [F,C,kh,kw]."""
    _check_common(input, kernel, bias, stride, padding)
    n, c, h, w = input.shape
    f, kc, kh, kw = kernel.shape
    if c != kc:
        raise ShapeError(
            f"input channels do not match kernel channels: input {input.shape} vs kernel {kernel.shape}"
        )
    if h + 2 * padding < kh or w + 2 * padding < kw:
        raise ShapeError(
            f"kernel {kernel.shape} larger than padded input {input.shape} (padding {padding})"
        )
    if bias is not None and bias.shape != (f,):
        raise ShapeError(f"bias shape {bias.shape} does not match kernel {kernel.shape}")

    out = _conv_forward(input.data, kernel.data, stride, padding)
    if bias is not None:
        out = out + bias.data.reshape(1, f, 1, 1)

    def _backward(g: np.ndarray):
        grads = [
            _conv_input_grad(g, kernel.data, input.shape, stride, padding) if input.requires_grad else None,
            _conv_kernel_grad(g, input.data, kh, kw, stride, padding) if kernel.requires_grad else None,
        ]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    inputs = (input, kernel) if bias is None else (input, kernel, bias)
    return make_result("conv2d", out, inputs, _backward)


def conv_transpose2d(
    input: Tensor,
    kernel: Tensor,
    bias: Optional[Tensor] = None,
    stride: int = 1,
    padding: int = 0,
) -> Tensor:
    """
    Transposed convolution; ``kernel`` is [F_in, C_out, kh, kw], the same tensor
    the matching ``conv2d`` would use to go from C_out back to F_in channels.
    A fractional stride of 1/2 is ``stride=2`` here.
    """
    _check_common(input, kernel, bias, stride, padding)
    n, f, h, w = input.shape
    kf, c, kh, kw = kernel.shape
    if f != kf:
        raise ShapeError(
            f"input channels do not match kernel channels: input {input.shape} vs kernel {kernel.shape}"
        )
    ho = conv_transpose_output_size(h, kh, stride, padding)
    wo = conv_transpose_output_size(w, kw, stride, padding)
    if ho < 1 or wo < 1:
        raise ShapeError(f"transposed convolution of {input.shape} with {kernel.shape} is empty")
    if bias is not None and bias.shape != (c,):
        raise ShapeError(f"bias shape {bias.shape} does not match kernel {kernel.shape}")

    out = _conv_input_grad(input.data, kernel.data, (n, c, ho, wo), stride, padding)
    if bias is not None:
        out = out + bias.data.reshape(1, c, 1, 1)

    def _backward(g: np.ndarray):
        grads = [
            _conv_forward(g, kernel.data, stride, padding) if input.requires_grad else None,
            _conv_kernel_grad(input.data, g, kh, kw, stride, padding) if kernel.requires_grad else None,
        ]
        if bias is not None:
            grads.append(g.sum(axis=(0, 2, 3)))
        return grads

    inputs = (input, kernel) if bias is None else (input, kernel, bias)
    return make_result("conv_transpose2d", out, inputs, _backward)
