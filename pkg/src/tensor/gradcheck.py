"""Finite-difference oracle for tape gradients."""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from src.tensor.tensor import GradTape, Tensor, no_grad

logger = logging.getLogger(__name__)

ScalarFn = Callable[[Tensor], Tensor]

DENOMINATOR_FLOOR = 1e-8
KINK_TOLERANCE = 1e-3


@dataclass
class GradCheckResult:
    """Outcome of a gradient check over a set of coordinates."""

    max_relative_error: float
    worst_index: Optional[int] = None
    analytic: Optional[float] = None
    numeric: Optional[float] = None
    checked: int = 0
    skipped: int = 0
    finite: bool = True
    message: str = ""

    def passed(self, tolerance: float) -> bool:
        return self.finite and self.max_relative_error < tolerance


def _evaluate(f: ScalarFn, data: np.ndarray) -> float:
    with no_grad():
        value = f(Tensor(data))
    return float(np.asarray(value.data).reshape(-1)[0])


def gradient_check(
    f: ScalarFn,
    point: Tensor,
    eps: float = 1e-5,
    coords: Optional[Sequence[int]] = None,
    skip_kinks: bool = False,
) -> GradCheckResult:
    """
    Compare the tape gradient of ``f`` at ``point`` with central differences.

    Everything runs at 64-bit. ``coords`` restricts the check to flat indices.
    With ``skip_kinks`` a coordinate whose forward and backward one-sided
    differences disagree (a ReLU crossing inside ±eps) is counted as skipped.
    A check that compares no coordinate at all reports an infinite error.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    base = np.array(point.data, dtype=np.float64)

    x = Tensor(base.copy(), requires_grad=True)
    with GradTape() as tape:
        y = f(x)
        if not y.is_finite():
            return GradCheckResult(float("inf"), finite=False, message="f is non-finite at the point")
        tape.backward(y, inputs=[x])
    analytic = np.asarray(x.grad, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(analytic)):
        return GradCheckResult(float("inf"), finite=False, message="analytic gradient is non-finite")

    f0 = float(np.asarray(y.data).reshape(-1)[0]) if skip_kinks else 0.0
    indices = range(base.size) if coords is None else coords
    result = GradCheckResult(0.0)
    flat = base.reshape(-1)
    for index in indices:
        plus = flat.copy()
        plus[index] += eps
        minus = flat.copy()
        minus[index] -= eps
        f_plus = _evaluate(f, plus.reshape(base.shape))
        f_minus = _evaluate(f, minus.reshape(base.shape))
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            result.finite = False
            result.max_relative_error = float("inf")
            result.worst_index = int(index)
            result.message = f"f is non-finite near coordinate {index}"
            return result

        if skip_kinks:
            forward = (f_plus - f0) / eps
            backward_diff = (f0 - f_minus) / eps
            spread = abs(forward - backward_diff)
            if spread > KINK_TOLERANCE * max(abs(forward), abs(backward_diff), 1e-6):
                result.skipped += 1
                continue

        numeric = (f_plus - f_minus) / (2.0 * eps)
        a = float(analytic[index])
        error = abs(a - numeric) / max(abs(a), abs(numeric), DENOMINATOR_FLOOR)
        result.checked += 1
        if result.worst_index is None or error > result.max_relative_error:
            result.max_relative_error = error
            result.worst_index = int(index)
            result.analytic = a
            result.numeric = numeric

    if result.skipped:
        logger.debug(f"gradient_check skipped {result.skipped} kink coordinates")
    if result.checked == 0:
        result.max_relative_error = float("inf")
        result.message = f"no coordinate checked ({result.skipped} skipped as kinks)"
    return result


def finite_difference_check(f: ScalarFn, point: Tensor, eps: float = 1e-5) -> float:
    """Max relative error between analytic and central-difference gradients."""
    return gradient_check(f, point, eps=eps).max_relative_error
