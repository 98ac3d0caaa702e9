from src.tensor.conv import conv2d, conv_output_size, conv_transpose2d, conv_transpose_output_size
from src.tensor.functional import (
    cross_entropy,
    instance_norm,
    l1_error,
    log_softmax,
    resize,
    squared_error,
)
from src.tensor.gradcheck import GradCheckResult, finite_difference_check, gradient_check
from src.tensor.tensor import (
    GradTape,
    Tensor,
    abs_,
    active_tape,
    add,
    backward,
    backward_hook,
    concat,
    div,
    leaky_relu,
    log_clamped,
    mul,
    no_grad,
    reduce_mean,
    reduce_sum,
    relu,
    reshape,
    resolve_dtype,
    scale,
    sigmoid,
    split,
    square,
    stack,
    sub,
    tanh,
)

__all__ = [
    "Tensor",
    "GradTape",
    "backward",
    "backward_hook",
    "no_grad",
    "active_tape",
    "resolve_dtype",
    "add",
    "sub",
    "mul",
    "div",
    "scale",
    "square",
    "abs_",
    "relu",
    "leaky_relu",
    "tanh",
    "sigmoid",
    "log_clamped",
    "reduce_sum",
    "reduce_mean",
    "reshape",
    "concat",
    "stack",
    "split",
    "conv2d",
    "conv_transpose2d",
    "conv_output_size",
    "conv_transpose_output_size",
    "instance_norm",
    "resize",
    "squared_error",
    "l1_error",
    "log_softmax",
    "cross_entropy",
    "gradient_check",
    "finite_difference_check",
    "GradCheckResult",
]
