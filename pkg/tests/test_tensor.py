import threading
import unittest

import numpy as np
import pytest

from src.core.errors import NumericalError, RecycleGANError, ShapeError
from src.tensor import (
    GradTape,
    Tensor,
    backward,
    backward_hook,
    concat,
    cross_entropy,
    finite_difference_check,
    gradient_check,
    instance_norm,
    l1_error,
    leaky_relu,
    log_softmax,
    no_grad,
    reduce_mean,
    reduce_sum,
    relu,
    resize,
    sigmoid,
    split,
    squared_error,
    stack,
    tanh,
)


def rand(rng, *shape):
    return Tensor(rng.uniform(-1.0, 1.0, size=shape), dtype="float64")


class TestTape(unittest.TestCase):
    def test_gradient_of_product_and_sum(self):
        """d/da sum(a*b) == b and d/db == a."""
        rng = np.random.default_rng(0)
        a = Tensor(rng.normal(size=(3, 4)), requires_grad=True, dtype="float64")
        b = Tensor(rng.normal(size=(3, 4)), requires_grad=True, dtype="float64")
        with GradTape() as tape:
            loss = (a * b).sum()
            tape.backward(loss)
        np.testing.assert_allclose(a.grad, b.data)
        np.testing.assert_allclose(b.grad, a.data)

    def test_gradients_accumulate_across_uses(self):
        x = Tensor(np.array([2.0]), requires_grad=True, dtype="float64")
        with GradTape() as tape:
            loss = (x * x + x * 3.0).sum()
            tape.backward(loss)
        np.testing.assert_allclose(x.grad, [2 * 2.0 + 3.0])

    def test_nothing_recorded_without_tape(self):
        x = Tensor(np.ones(3), requires_grad=True)
        y = x * 2.0
        self.assertFalse(y.requires_grad)
        with self.assertRaises(RecycleGANError):
            backward(y.sum())

    def test_no_grad_suspends_recording(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with GradTape() as tape:
            with no_grad():
                y = x * 2.0
            self.assertEqual(len(tape), 0)
            self.assertFalse(y.requires_grad)

    def test_broadcast_gradient_is_reduced(self):
        x = Tensor(np.ones((2, 3)), requires_grad=True, dtype="float64")
        b = Tensor(np.ones((1, 3)), requires_grad=True, dtype="float64")
        with GradTape() as tape:
            tape.backward((x + b).sum())
        self.assertEqual(b.grad.shape, (1, 3))
        np.testing.assert_allclose(b.grad, [[2.0, 2.0, 2.0]])

    def test_non_scalar_loss_rejected(self):
        x = Tensor(np.ones(3), requires_grad=True)
        with GradTape() as tape:
            y = x * 2.0
            with self.assertRaises(ShapeError):
                tape.backward(y)

    def test_untouched_inputs_get_zero_gradients(self):
        x = Tensor(np.ones(3), requires_grad=True, dtype="float64")
        unused = Tensor(np.ones(2), requires_grad=True, dtype="float64")
        with GradTape() as tape:
            tape.backward(x.sum(), inputs=[x, unused])
        np.testing.assert_array_equal(unused.grad, np.zeros(2))

    def test_nested_tapes_record_on_innermost(self):
        x = Tensor(np.ones(2), requires_grad=True, dtype="float64")
        with GradTape() as outer:
            with GradTape() as inner:
                loss = (x * 4.0).sum()
            self.assertEqual(len(outer), 0)
            inner.backward(loss)
        np.testing.assert_allclose(x.grad, [4.0, 4.0])

    def test_tapes_are_thread_local(self):
        seen = {}

        def worker():
            x = Tensor(np.ones(2), requires_grad=True)
            with GradTape() as tape:
                (x * 2.0).sum()
                seen["worker"] = len(tape)

        with GradTape() as main_tape:
            thread = threading.Thread(target=worker)
            thread.start()
            thread.join()
            self.assertEqual(len(main_tape), 0)
        self.assertEqual(seen["worker"], 2)

    def test_check_finite_names_tensor(self):
        t = Tensor(np.array([1.0, np.nan, np.inf]))
        with self.assertRaisesRegex(NumericalError, "weights holds 2 non-finite"):
            t.check_finite("weights")

    def test_backward_hook_rewrites_and_restores(self):
        def doubled():
            x = Tensor(np.array([1.0, 2.0]), requires_grad=True, dtype="float64")
            with GradTape() as tape:
                tape.backward((x * 3.0).sum())
            return x.grad

        with backward_hook("mul", lambda grads: [g * 2.0 for g in grads]):
            np.testing.assert_allclose(doubled(), [6.0, 6.0])
        np.testing.assert_allclose(doubled(), [3.0, 3.0])


class TestPrimitiveGradients:
    """Central differences at 64-bit for the elementwise and reduction primitives."""

    @pytest.fixture
    def rng(self):
        return np.random.default_rng(7)

    @pytest.mark.parametrize(
        "fn",
        [
            lambda x: (x * x).sum(),
            lambda x: tanh(x).sum(),
            lambda x: sigmoid(x * 2.0).mean(),
            lambda x: reduce_sum(x, axis=1).sum(),
            lambda x: reduce_mean(x * x, axis=(0, 2)).sum(),
            lambda x: (x / (x * x + 1.0)).sum(),
            lambda x: (x.reshape(2, -1) * 3.0).sum(),
        ],
    )
    def test_smooth_primitives(self, rng, fn):
        assert finite_difference_check(fn, rand(rng, 2, 3, 4)) < 1e-6

    def test_relu_family_away_from_kinks(self, rng):
        x = rand(rng, 3, 5)
        x.data[np.abs(x.data) < 0.05] = 0.3
        assert finite_difference_check(lambda t: (relu(t) * t).sum(), x) < 1e-6
        assert finite_difference_check(lambda t: (leaky_relu(t) * t).sum(), x) < 1e-6

    def test_kinks_are_skipped(self):
        x = Tensor(np.array([0.0, 1.0, -1.0]), dtype="float64")
        result = gradient_check(lambda t: relu(t).sum(), x, skip_kinks=True)
        assert result.skipped == 1
        assert result.checked == 2
        assert result.passed(1e-6)

    def test_all_kinks_check_nothing_and_fail(self):
        x = Tensor(np.zeros(3), dtype="float64")
        result = gradient_check(lambda t: relu(t).sum(), x, skip_kinks=True)
        assert result.skipped == 3
        assert result.checked == 0
        assert not result.passed(1e-6)
        assert "no coordinate checked" in result.message

    def test_empty_coordinate_list_fails(self, rng):
        assert not gradient_check(lambda t: (t * t).sum(), rand(rng, 3), coords=[]).passed(1e-6)

    def test_concat_stack_split(self, rng):
        x = rand(rng, 2, 3, 2, 2)
        weights = Tensor(rng.normal(size=(2, 9, 2, 2)), dtype="float64")
        assert finite_difference_check(lambda t: (concat([t, t * t, t], axis=1) * weights).sum(), x) < 1e-6
        parts = split(x, 2, axis=0)
        assert [p.shape for p in parts] == [(1, 3, 2, 2), (1, 3, 2, 2)]
        np.testing.assert_array_equal(stack([p.reshape(3, 2, 2) for p in parts]).data, x.data)

    def test_instance_norm(self, rng):
        x = rand(rng, 2, 3, 4, 4)
        w = Tensor(rng.normal(size=(2, 3, 4, 4)), dtype="float64")
        gamma = Tensor(rng.normal(size=3), dtype="float64")
        beta = Tensor(rng.normal(size=3), dtype="float64")
        assert finite_difference_check(lambda t: (instance_norm(t) * w).sum(), x) < 1e-5
        assert finite_difference_check(lambda t: (instance_norm(t, gamma, beta) * w).sum(), x) < 1e-5
        out = instance_norm(x).data
        np.testing.assert_allclose(out.mean(axis=(2, 3)), 0.0, atol=1e-12)

    def test_instance_norm_of_a_constant_channel(self, rng):
        x = rand(rng, 2, 3, 4, 4)
        x.data[:, 1] = 0.5
        np.testing.assert_array_equal(instance_norm(x).data[:, 1], np.zeros((2, 4, 4)))
        gamma = Tensor(np.array([2.0, 3.0, 4.0]), dtype="float64")
        beta = Tensor(np.array([0.1, -0.2, 0.3]), dtype="float64")
        np.testing.assert_array_equal(instance_norm(x, gamma, beta).data[:, 1], np.full((2, 4, 4), -0.2))

    @pytest.mark.parametrize("mode", ["nearest", "bilinear"])
    def test_resize(self, rng, mode):
        x = rand(rng, 1, 2, 3, 3)
        w = Tensor(rng.normal(size=(1, 2, 6, 5)), dtype="float64")
        assert finite_difference_check(lambda t: (resize(t, (6, 5), mode) * w).sum(), x) < 1e-6

    def test_resize_nearest_doubles_pixels(self):
        x = Tensor(np.arange(4.0).reshape(1, 1, 2, 2))
        out = resize(x, (4, 4), "nearest").data[0, 0]
        np.testing.assert_array_equal(out[:2, :2], np.zeros((2, 2)))
        np.testing.assert_array_equal(out[2:, 2:], np.full((2, 2), 3.0))

    def test_losses(self, rng):
        target = rand(rng, 2, 3)
        assert finite_difference_check(lambda t: squared_error(t, target), rand(rng, 2, 3)) < 1e-6
        x = rand(rng, 2, 3)
        x.data[np.abs(x.data - target.data) < 0.05] += 0.2
        assert finite_difference_check(lambda t: l1_error(t, target), x) < 1e-6

    def test_squared_error_value(self):
        pred = Tensor(np.array([1.0, 2.0, 3.0]))
        target = Tensor(np.array([1.0, 0.0, 0.0]))
        assert squared_error(pred, target).item() == pytest.approx(13.0 / 3.0)
        assert l1_error(pred, target).item() == pytest.approx(5.0 / 3.0)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            squared_error(Tensor(np.zeros(3)), Tensor(np.zeros(4)))

    def test_cross_entropy(self, rng):
        labels = rng.integers(0, 3, size=(2, 4, 4))
        assert finite_difference_check(lambda t: cross_entropy(t, labels), rand(rng, 2, 3, 4, 4)) < 1e-6
        uniform = Tensor(np.zeros((1, 3, 2, 2)), dtype="float64")
        assert cross_entropy(uniform, np.zeros((1, 2, 2), dtype=np.int64)).item() == pytest.approx(np.log(3.0))

    def test_log_softmax_normalizes(self, rng):
        out = log_softmax(rand(rng, 2, 4, 3, 3), axis=1).data
        np.testing.assert_allclose(np.exp(out).sum(axis=1), 1.0, atol=1e-12)

    def test_cross_entropy_rejects_bad_labels(self):
        with pytest.raises(ShapeError):
            cross_entropy(Tensor(np.zeros((1, 3, 2, 2))), np.full((1, 2, 2), 3))


class TestFiniteDifferenceCheck(unittest.TestCase):
    def test_sum_of_squares_is_exact(self):
        x = Tensor(np.array([[0.5, -1.2, 2.0], [0.3, 0.9, -0.7]]), dtype="float64")
        self.assertLess(finite_difference_check(lambda t: (t * t).sum(), x), 1e-8)

    def test_constant_function_has_no_error(self):
        x = Tensor(np.array([0.5, -1.2, 2.0]), dtype="float64")
        self.assertEqual(finite_difference_check(lambda t: t.sum() * 0.0 + 3.0, x), 0.0)

    def test_non_finite_function_fails(self):
        x = Tensor(np.array([0.5, -1.2, 2.0]), dtype="float64")
        result = gradient_check(lambda t: (t * t).sum() * float("inf"), x)
        self.assertFalse(result.finite)
        self.assertFalse(result.passed(1e-6))
        self.assertEqual(finite_difference_check(lambda t: (t * t).sum() * float("inf"), x), float("inf"))
