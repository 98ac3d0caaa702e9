"""
Dense numpy-backed tensors with a reverse-mode gradient tape.

Operations are only recorded while a ``GradTape`` is active on the current
thread; outside a tape every tensor is a plain value. One tape belongs to one
thread, independent tapes may run on different threads.
"""

import logging
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.core.errors import NumericalError, RecycleGANError, ShapeError

logger = logging.getLogger(__name__)

DEFAULT_DTYPE = np.float32
PRECISIONS = {"float32": np.float32, "float64": np.float64}

ArrayLike = Union["Tensor", np.ndarray, float, int, Sequence[float]]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_state = threading.local()

# op name -> rewrite of that op's input gradients; only the verification suite installs these
GradHook = Callable[[Sequence[Optional[np.ndarray]]], Sequence[Optional[np.ndarray]]]
_backward_hooks: Dict[str, GradHook] = {}


@contextmanager
def backward_hook(op: str, hook: GradHook) -> Iterator[None]:
    """Route the input gradients of every ``op`` entry through ``hook`` while active."""
    previous = _backward_hooks.get(op)
    _backward_hooks[op] = hook
    try:
        yield
    finally:
        if previous is None:
            _backward_hooks.pop(op, None)
        else:
            _backward_hooks[op] = previous


def _tape_stack() -> List["GradTape"]:
    stack = getattr(_state, "tapes", None)
    if stack is None:
        stack = []
        _state.tapes = stack
    return stack


def _grad_enabled() -> bool:
    return getattr(_state, "grad_enabled", True)


def active_tape() -> Optional["GradTape"]:
    stack = _tape_stack()
    return stack[-1] if stack else None


@contextmanager
def no_grad() -> Iterator[None]:
    """Suspend recording on the current thread."""
    previous = _grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = previous


def resolve_dtype(precision: Union[str, np.dtype, type, None]) -> np.dtype:
    if precision is None:
        return np.dtype(DEFAULT_DTYPE)
    if isinstance(precision, str):
        if precision not in PRECISIONS:
            raise ValueError(f"Unknown precision '{precision}', expected one of {list(PRECISIONS)}")
        return np.dtype(PRECISIONS[precision])
    return np.dtype(precision)


class Tensor:
    """N-dimensional array with optional participation in a gradient tape."""

    def __init__(
        self,
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Union[str, np.dtype, type, None] = None,
        name: Optional[str] = None,
    ):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is not None:
            array = np.asarray(data, dtype=resolve_dtype(dtype))
        else:
            array = np.asarray(data)
            if not np.issubdtype(array.dtype, np.floating):
                array = array.astype(DEFAULT_DTYPE)
        self.data: np.ndarray = array
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self._tape: Optional["GradTape"] = None
        self._entry: Optional[int] = None

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, requires_grad={self.requires_grad}{label})"

    def __len__(self) -> int:
        return self.shape[0]

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.data)))

    def check_finite(self, name: Optional[str] = None) -> "Tensor":
        if not self.is_finite():
            bad = int(np.size(self.data) - np.count_nonzero(np.isfinite(self.data)))
            raise NumericalError(f"{name or self.name or 'tensor'} holds {bad} non-finite values")
        return self

    def _accumulate(self, grad: np.ndarray) -> None:
        grad = np.asarray(grad, dtype=self.data.dtype).reshape(self.data.shape)
        self.grad = grad.copy() if self.grad is None else self.grad + grad

    # -------------------------------------------------------------- arithmetic
    def __add__(self, other: ArrayLike) -> "Tensor":
        return add(self, other)

    def __radd__(self, other: ArrayLike) -> "Tensor":
        return add(other, self)

    def __sub__(self, other: ArrayLike) -> "Tensor":
        return sub(self, other)

    def __rsub__(self, other: ArrayLike) -> "Tensor":
        return sub(other, self)

    def __mul__(self, other: ArrayLike) -> "Tensor":
        return mul(self, other)

    def __rmul__(self, other: ArrayLike) -> "Tensor":
        return mul(other, self)

    def __truediv__(self, other: ArrayLike) -> "Tensor":
        return div(self, other)

    def __neg__(self) -> "Tensor":
        return scale(self, -1.0)

    def __getitem__(self, index: Any) -> "Tensor":
        return take(self, index)

    def sum(self, axis: Union[int, Tuple[int, ...], None] = None, keepdims: bool = False) -> "Tensor":
        return reduce_sum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Union[int, Tuple[int, ...], None] = None, keepdims: bool = False) -> "Tensor":
        return reduce_mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape: int) -> "Tensor":
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def relu(self) -> "Tensor":
        return relu(self)

    def tanh(self) -> "Tensor":
        return tanh(self)

    def sigmoid(self) -> "Tensor":
        return sigmoid(self)


@dataclass
class TapeEntry:
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward_fn: BackwardFn


class GradTape:
    """
    Ordered record of executed differentiable operations.

    Entries are appended in execution order, which is a topological order of
    the computation. ``backward`` walks them in reverse and visits each entry
    exactly once.
    """

    def __init__(self) -> None:
        self.entries: List[TapeEntry] = []

    def __enter__(self) -> "GradTape":
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _tape_stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.entries)

    def record(self, op: str, inputs: Tuple[Tensor, ...], output: Tensor, backward_fn: BackwardFn) -> None:
        output._tape = self
        output._entry = len(self.entries)
        self.entries.append(TapeEntry(op, inputs, output, backward_fn))

    def clear(self) -> None:
        for entry in self.entries:
            entry.output._tape = None
            entry.output._entry = None
        self.entries = []

    def backward(
        self,
        loss: Tensor,
        inputs: Optional[Sequence[Tensor]] = None,
        retain: bool = False,
    ) -> None:
        if loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        if loss._tape is not self or loss._entry is None:
            raise RecycleGANError("loss is not connected to this gradient tape")

        pending: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
        for entry in reversed(self.entries[: loss._entry + 1]):
            out_grad = pending.pop(id(entry.output), None)
            if out_grad is None:
                continue
            entry.output.grad = out_grad
            input_grads = entry.backward_fn(out_grad)
            hook = _backward_hooks.get(entry.op)
            if hook is not None:
                input_grads = hook(input_grads)
            for tensor, grad in zip(entry.inputs, input_grads):
                if grad is None or not tensor.requires_grad:
                    continue
                grad = np.asarray(grad, dtype=tensor.data.dtype).reshape(tensor.data.shape)
                if tensor._tape is self and tensor._entry is not None:
                    key = id(tensor)
                    pending[key] = pending[key] + grad if key in pending else grad
                else:
                    tensor._accumulate(grad)

        for tensor in inputs or ():
            if tensor.grad is None:
                tensor.zero_grad()
        if not retain:
            self.clear()


def backward(loss: Tensor, inputs: Optional[Sequence[Tensor]] = None) -> None:
    """Populate ``grad`` of every tensor on the loss's tape that it depends on."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._tape is None:
        raise RecycleGANError("loss is not connected to a gradient tape")
    loss._tape.backward(loss, inputs=inputs)


# ---------------------------------------------------------------------- helpers
def as_tensor(value: ArrayLike, like: Optional[Tensor] = None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(np.asarray(value, dtype=dtype) if dtype is not None else value)


def make_result(op: str, data: np.ndarray, inputs: Tuple[Tensor, ...], backward_fn: BackwardFn) -> Tensor:
    """Wrap ``data`` as an op output and record it when a tape is active."""
    tape = active_tape()
    track = tape is not None and _grad_enabled() and any(t.requires_grad for t in inputs)
    out = Tensor(data, requires_grad=track)
    if track:
        tape.record(op, inputs, out, backward_fn)
    return out


def unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# -------------------------------------------------------------- elementwise ops
def add(a: ArrayLike, b: ArrayLike) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    return make_result(
        "add",
        a.data + b.data,
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(g, b.shape)),
    )


def sub(a: ArrayLike, b: ArrayLike) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    return make_result(
        "sub",
        a.data - b.data,
        (a, b),
        lambda g: (unbroadcast(g, a.shape), unbroadcast(-g, b.shape)),
    )


def mul(a: ArrayLike, b: ArrayLike) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    return make_result(
        "mul",
        a.data * b.data,
        (a, b),
        lambda g: (unbroadcast(g * b.data, a.shape), unbroadcast(g * a.data, b.shape)),
    )


def div(a: ArrayLike, b: ArrayLike) -> Tensor:
    a = as_tensor(a, b if isinstance(b, Tensor) else None)
    b = as_tensor(b, a)
    return make_result(
        "div",
        a.data / b.data,
        (a, b),
        lambda g: (
            unbroadcast(g / b.data, a.shape),
            unbroadcast(-g * a.data / (b.data * b.data), b.shape),
        ),
    )


def scale(x: Tensor, factor: float) -> Tensor:
    factor_cast = x.data.dtype.type(factor)
    return make_result("scale", x.data * factor_cast, (x,), lambda g: (g * factor_cast,))


def square(x: Tensor) -> Tensor:
    return make_result("square", x.data * x.data, (x,), lambda g: (2.0 * g * x.data,))


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    return make_result("relu", np.where(mask, x.data, 0).astype(x.dtype), (x,), lambda g: (g * mask,))


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    mask = x.data > 0
    factor = np.where(mask, 1.0, slope).astype(x.dtype)
    return make_result("leaky_relu", x.data * factor, (x,), lambda g: (g * factor,))


def tanh(x: Tensor) -> Tensor:
    out = np.tanh(x.data)
    return make_result("tanh", out, (x,), lambda g: (g * (1.0 - out * out),))


def sigmoid(x: Tensor) -> Tensor:
    # split by sign so large magnitudes never overflow exp
    data = x.data
    out = np.empty_like(data)
    pos = data >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-data[pos]))
    exp_neg = np.exp(data[~pos])
    out[~pos] = exp_neg / (1.0 + exp_neg)
    return make_result("sigmoid", out, (x,), lambda g: (g * out * (1.0 - out),))


def abs_(x: Tensor) -> Tensor:
    sign = np.sign(x.data)
    return make_result("abs", np.abs(x.data), (x,), lambda g: (g * sign,))


def log_clamped(x: Tensor, eps: float = 1e-7) -> Tensor:
    """log(clip(x, eps, 1)); the gradient is zero where the clamp is active."""
    clipped = np.clip(x.data, eps, 1.0)
    inside = (x.data >= eps) & (x.data <= 1.0)
    return make_result("log", np.log(clipped), (x,), lambda g: (np.where(inside, g / clipped, 0.0),))


# ------------------------------------------------------------------ reductions
def _normalize_axes(axis: Union[int, Tuple[int, ...], None], ndim: int) -> Tuple[int, ...]:
    if axis is None:
        return tuple(range(ndim))
    if isinstance(axis, int):
        axis = (axis,)
    return tuple(sorted(a % ndim for a in axis))


def reduce_sum(x: Tensor, axis: Union[int, Tuple[int, ...], None] = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    out = x.data.sum(axis=axes, keepdims=keepdims)

    def _backward(g: np.ndarray) -> Tuple[np.ndarray]:
        if not keepdims:
            g = np.expand_dims(g, axes) if axes else g
        return (np.broadcast_to(g, x.shape),)

    return make_result("sum", np.asarray(out), (x,), _backward)


def reduce_mean(x: Tensor, axis: Union[int, Tuple[int, ...], None] = None, keepdims: bool = False) -> Tensor:
    axes = _normalize_axes(axis, x.ndim)
    count = int(np.prod([x.shape[a] for a in axes])) if axes else 1
    out = x.data.sum(axis=axes, keepdims=keepdims) / x.data.dtype.type(count)

    def _backward(g: np.ndarray) -> Tuple[np.ndarray]:
        if not keepdims:
            g = np.expand_dims(g, axes) if axes else g
        return (np.broadcast_to(g / count, x.shape),)

    return make_result("mean", np.asarray(out), (x,), _backward)


# --------------------------------------------------------------- shape ops
def reshape(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    return make_result("reshape", x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def take(x: Tensor, index: Any) -> Tensor:
    """Basic (slice/int) indexing."""
    out = x.data[index]

    def _backward(g: np.ndarray) -> Tuple[np.ndarray]:
        full = np.zeros_like(x.data)
        full[index] = g
        return (full,)

    return make_result("take", np.array(out), (x,), _backward)


def concat(tensors: Sequence[Tensor], axis: int = 1) -> Tensor:
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    tensors = tuple(tensors)
    sizes = [t.shape[axis] for t in tensors]
    out = np.concatenate([t.data for t in tensors], axis=axis)

    def _backward(g: np.ndarray) -> List[np.ndarray]:
        grads = []
        start = 0
        for size in sizes:
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, start + size)
            grads.append(g[tuple(index)])
            start += size
        return grads

    return make_result("concat", out, tensors, _backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = tuple(tensors)
    out = np.stack([t.data for t in tensors], axis=axis)
    return make_result(
        "stack",
        out,
        tensors,
        lambda g: [np.take(g, i, axis=axis) for i in range(len(tensors))],
    )


def split(x: Tensor, sections: int, axis: int = 0) -> List[Tensor]:
    """Split into ``sections`` equal parts along ``axis``."""
    if x.shape[axis] % sections:
        raise ShapeError(f"cannot split axis {axis} of shape {x.shape} into {sections} parts")
    size = x.shape[axis] // sections
    parts = []
    for i in range(sections):
        index = [slice(None)] * x.ndim
        index[axis] = slice(i * size, (i + 1) * size)
        parts.append(take(x, tuple(index)))
    return parts
