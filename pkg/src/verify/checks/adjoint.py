from typing import List, Tuple

import numpy as np

from src.models.reports import CheckResult
from src.tensor import Tensor, conv2d, conv_transpose2d
from src.verify.base import AbstractCheck

# (input shape [N,C,H,W], kernel [F,C,kh,kw], stride, padding); every shape
# is chosen so the transposed output size recovers H and W exactly
SHAPES: List[Tuple[Tuple[int, ...], Tuple[int, ...], int, int]] = [
    ((1, 1, 5, 5), (1, 1, 3, 3), 1, 0),
    ((2, 3, 6, 6), (4, 3, 3, 3), 1, 1),
    ((2, 3, 8, 8), (5, 3, 4, 4), 2, 1),
    ((1, 2, 9, 9), (3, 2, 3, 3), 2, 0),
    ((1, 3, 7, 7), (2, 3, 7, 7), 1, 3),
    ((2, 4, 10, 10), (2, 4, 4, 4), 2, 0),
]


class ConvAdjointCheck(AbstractCheck):
    """<conv2d(x, k), y> == <x, conv_transpose2d(y, k)> at 64-bit."""

    name = "conv_adjointness"
    description = "transposed convolution is the exact adjoint of convolution"
    tolerance = 1e-10

    def cases(self) -> List[str]:
        return [f"{x[2]}x{x[3]}_k{k[2]}_s{s}_p{p}" for x, k, s, p in SHAPES]

    def run_case(self, case: str) -> CheckResult:
        index = self.cases().index(case)
        x_shape, k_shape, stride, padding = SHAPES[index]
        rng = np.random.default_rng([self.seed, index])
        x = Tensor(rng.normal(size=x_shape))
        k = Tensor(rng.normal(size=k_shape))
        forward = conv2d(x, k, stride=stride, padding=padding)
        y = Tensor(rng.normal(size=forward.shape))
        back = conv_transpose2d(y, k, stride=stride, padding=padding)
        if back.shape != x.shape:
            return self.expect(case, False, f"transposed output {back.shape} does not match input {x.shape}")
        lhs = float(np.sum(forward.data * y.data))
        rhs = float(np.sum(x.data * back.data))
        error = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1.0)
        return self.below(case, error)
