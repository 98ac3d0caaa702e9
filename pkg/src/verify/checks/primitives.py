"""Finite-difference checks of every differentiable primitive at 64-bit."""

from typing import Callable, Dict, List, Tuple

import numpy as np

from src.models.reports import CheckResult
from src.tensor import (
    Tensor,
    abs_,
    concat,
    conv2d,
    conv_transpose2d,
    cross_entropy,
    div,
    gradient_check,
    instance_norm,
    l1_error,
    leaky_relu,
    log_clamped,
    log_softmax,
    mul,
    reduce_mean,
    reduce_sum,
    relu,
    resize,
    scale,
    sigmoid,
    square,
    squared_error,
    tanh,
)
from src.verify.base import AbstractCheck

Case = Tuple[Callable[[Tensor], Tensor], Tensor, bool]

SHAPE = (2, 3, 4, 4)


class PrimitiveGradientCheck(AbstractCheck):
    name = "primitive_gradients"
    description = "tape gradients of each primitive against central differences"
    tolerance = 1e-4

    def __init__(self, config=None):
        super().__init__(config)
        self.eps = float(self.config.get("eps", 1e-5))

    def _builders(self) -> Dict[str, Callable[[np.random.Generator], Case]]:
        def weighted(rng: np.random.Generator, shape) -> Tensor:
            return Tensor(rng.normal(size=shape))

        def point(rng, shape=SHAPE, low=None, high=None) -> Tensor:
            if low is not None:
                return Tensor(rng.uniform(low, high, size=shape))
            return Tensor(rng.normal(size=shape))

        def elementwise(op, low=None, high=None, kinks=False):
            def build(rng):
                w = weighted(rng, SHAPE)
                return (lambda x: reduce_sum(op(x) * w)), point(rng, low=low, high=high), kinks

            return build

        def with_constant(op):
            def build(rng):
                c = Tensor(rng.uniform(0.5, 1.5, size=SHAPE))
                w = weighted(rng, SHAPE)
                return (lambda x: reduce_sum(op(x, c) * w)), point(rng), False

            return build

        def conv_case(which, transpose):
            def build(rng):
                stride, padding = 2, 1
                if transpose:
                    x = rng.normal(size=(2, 3, 3, 3))
                    k = rng.normal(size=(3, 2, 4, 4))
                    fn = conv_transpose2d
                else:
                    x = rng.normal(size=(2, 3, 6, 6))
                    k = rng.normal(size=(4, 3, 3, 3))
                    fn = conv2d
                bias_size = k.shape[1] if transpose else k.shape[0]
                b = rng.normal(size=(bias_size,))
                out_shape = fn(Tensor(x), Tensor(k), Tensor(b), stride, padding).shape
                w = weighted(rng, out_shape)
                if which == "input":
                    return (lambda t: reduce_sum(fn(t, Tensor(k), Tensor(b), stride, padding) * w)), Tensor(x), False
                if which == "kernel":
                    return (lambda t: reduce_sum(fn(Tensor(x), t, Tensor(b), stride, padding) * w)), Tensor(k), False
                return (lambda t: reduce_sum(fn(Tensor(x), Tensor(k), t, stride, padding) * w)), Tensor(b), False

            return build

        def norm_case(rng):
            weight = Tensor(rng.uniform(0.5, 1.5, size=(SHAPE[1],)))
            bias = Tensor(rng.normal(size=(SHAPE[1],)))
            w = weighted(rng, SHAPE)
            return (lambda x: reduce_sum(instance_norm(x, weight, bias) * w)), point(rng), False

        def norm_affine_case(rng):
            x = rng.normal(size=SHAPE)
            w = weighted(rng, SHAPE)
            bias = Tensor(rng.normal(size=(SHAPE[1],)))
            return (lambda g: reduce_sum(instance_norm(Tensor(x), g, bias) * w)), point(rng, (SHAPE[1],)), False

        def resize_case(mode, size):
            def build(rng):
                w = weighted(rng, (SHAPE[0], SHAPE[1]) + size)
                return (lambda x: reduce_sum(resize(x, size, mode) * w)), point(rng), False

            return build

        def reduction_case(op):
            def build(rng):
                w = weighted(rng, (SHAPE[0], SHAPE[2], SHAPE[3]))
                return (lambda x: reduce_sum(op(x, axis=1) * w)), point(rng), False

            return build

        def loss_case(op, kinks=False):
            def build(rng):
                target = Tensor(rng.normal(size=SHAPE))
                return (lambda x: op(x, target)), point(rng), kinks

            return build

        def concat_case(rng):
            other = Tensor(rng.normal(size=SHAPE))
            w = weighted(rng, (SHAPE[0], 3 * SHAPE[1]) + SHAPE[2:])
            return (lambda x: reduce_sum(concat([x, other, scale(x, 2.0)], axis=1) * w)), point(rng), False

        def softmax_case(rng):
            w = weighted(rng, SHAPE)
            return (lambda x: reduce_sum(log_softmax(x, axis=1) * w)), point(rng), False

        def cross_entropy_case(rng):
            labels = rng.integers(0, SHAPE[1], size=(SHAPE[0],) + SHAPE[2:])
            return (lambda x: cross_entropy(x, labels)), point(rng), False

        def accumulation_case(rng):
            w = weighted(rng, SHAPE)
            return (lambda x: reduce_sum(mul(x, x) * w + x * w)), point(rng), False

        return {
            "add": with_constant(lambda x, c: x + c),
            "sub": with_constant(lambda x, c: c - x),
            "mul": with_constant(mul),
            "div": elementwise(lambda x: div(1.0, x), low=0.5, high=1.5),
            "scale": elementwise(lambda x: scale(x, -0.3)),
            "square": elementwise(square),
            "abs": elementwise(abs_, kinks=True),
            "relu": elementwise(relu, kinks=True),
            "leaky_relu": elementwise(leaky_relu, kinks=True),
            "tanh": elementwise(tanh),
            "sigmoid": elementwise(sigmoid),
            "log": elementwise(log_clamped, low=0.05, high=0.95),
            "accumulation": accumulation_case,
            "concat": concat_case,
            "resize_nearest": resize_case("nearest", (6, 6)),
            "resize_bilinear": resize_case("bilinear", (7, 3)),
            "instance_norm": norm_case,
            "instance_norm_affine": norm_affine_case,
            "sum": reduction_case(reduce_sum),
            "mean": reduction_case(reduce_mean),
            "squared_error": loss_case(squared_error),
            "l1_error": loss_case(l1_error, kinks=True),
            "log_softmax": softmax_case,
            "cross_entropy": cross_entropy_case,
            "conv2d_input": conv_case("input", False),
            "conv2d_kernel": conv_case("kernel", False),
            "conv2d_bias": conv_case("bias", False),
            "conv_transpose2d_input": conv_case("input", True),
            "conv_transpose2d_kernel": conv_case("kernel", True),
            "conv_transpose2d_bias": conv_case("bias", True),
        }

    def cases(self) -> List[str]:
        return list(self._builders())

    def run_case(self, case: str) -> CheckResult:
        rng = np.random.default_rng([self.seed, sorted(self._builders()).index(case)])
        f, x, kinks = self._builders()[case](rng)
        result = gradient_check(f, x, eps=self.eps, skip_kinks=kinks)
        if not result.finite:
            return self.expect(case, False, result.message)
        message = result.message
        if result.max_relative_error >= self.tolerance and not message:
            message = (
                f"relative error {result.max_relative_error:.3e} at coordinate {result.worst_index} "
                f"(analytic {result.analytic:.6e}, numeric {result.numeric:.6e})"
            )
        return self.below(case, result.max_relative_error, message=message)
