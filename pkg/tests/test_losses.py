import unittest

import numpy as np
import pytest

from src.core.errors import ShapeError
from src.data import Triplet, TripletBatch
from src.losses import (
    adversarial_loss,
    compose_objective,
    cycle_loss,
    reconstruction,
    recurrent_loss,
    recycle_loss,
    regression_loss,
    total_objective,
)
from src.models.config import LossWeights
from src.tensor import GradTape, Tensor


def identity(x):
    return x


def negate(x):
    return -x


def extrapolate(prev, curr):
    """Constant-velocity predictor: exact on linear motion."""
    return curr * 2.0 - prev


def linear_batch(n=2, offset=0.0):
    """Triplets whose frames move linearly in time: f(t) = base + 0.1 t."""
    rng = np.random.default_rng(5)
    triplets = []
    for i in range(n):
        base = rng.uniform(-0.5, 0.5, size=(3, 4, 4)) + offset
        frames = [base + 0.1 * t for t in range(3)]
        triplets.append(Triplet(i + 1, frames[0], frames[1], frames[2]))
    return TripletBatch(triplets)


def constant_judge(value):
    return lambda x: x * 0.0 + value


NETS = {
    "G_X": identity,
    "G_Y": identity,
    "P_X": extrapolate,
    "P_Y": extrapolate,
    "D_X": constant_judge(1.0),
    "D_Y": constant_judge(1.0),
}


class TestReconstruction(unittest.TestCase):
    def test_norms(self):
        pred = Tensor(np.array([1.0, -1.0]))
        target = Tensor(np.zeros(2))
        self.assertAlmostEqual(reconstruction(pred, target, "l2").item(), 1.0)
        self.assertAlmostEqual(reconstruction(pred * 2.0, target, "l1").item(), 2.0)
        self.assertAlmostEqual(regression_loss(pred, target).item(), 1.0)

    def test_unknown_norm(self):
        with self.assertRaises(ValueError):
            reconstruction(Tensor(np.zeros(2)), Tensor(np.zeros(2)), "huber")


class TestAdversarial(unittest.TestCase):
    def setUp(self):
        self.reals = Tensor(np.ones((2, 1, 3, 3)))
        self.fakes = Tensor(np.zeros((2, 1, 3, 3)))

    def test_least_squares_sides(self):
        d = constant_judge(1.0)
        self.assertAlmostEqual(adversarial_loss(d, self.reals, self.fakes).item(), 1.0)
        self.assertAlmostEqual(adversarial_loss(d, None, self.fakes, side="generator").item(), 0.0)

    def test_log_sides_at_even_odds(self):
        d = constant_judge(0.0)
        disc = adversarial_loss(d, self.reals, self.fakes, mode="log").item()
        gen = adversarial_loss(d, None, self.fakes, mode="log", side="generator").item()
        self.assertAlmostEqual(disc, 2 * np.log(2.0), places=5)
        self.assertAlmostEqual(gen, np.log(0.5), places=5)

    def test_fakes_detached_on_discriminator_side(self):
        fakes = Tensor(np.full((1, 1, 2, 2), 0.5), requires_grad=True, dtype="float64")
        reals = Tensor(np.ones((1, 1, 2, 2)), dtype="float64")
        with GradTape():
            loss = adversarial_loss(identity, reals, fakes)
            self.assertFalse(loss.requires_grad)

    def test_empty_batches_rejected(self):
        d = constant_judge(1.0)
        with self.assertRaises(ShapeError):
            adversarial_loss(d, self.reals, Tensor(np.zeros((0, 1, 3, 3))))
        with self.assertRaises(ShapeError):
            adversarial_loss(d, None, self.fakes)

    def test_unknown_mode(self):
        with self.assertRaises(ValueError):
            adversarial_loss(constant_judge(1.0), self.reals, self.fakes, mode="wasserstein")


class TestTemporalLosses:
    def test_cycle_is_zero_for_inverse_pair(self):
        batch = Tensor(np.random.default_rng(0).uniform(-1, 1, size=(2, 3, 4, 4)))
        assert cycle_loss(negate, negate, batch).item() == pytest.approx(0.0)
        assert cycle_loss(identity, negate, batch).item() > 0.0

    def test_recurrent_exact_on_linear_motion(self):
        assert recurrent_loss(extrapolate, linear_batch()).item() == pytest.approx(0.0, abs=1e-12)
        assert recurrent_loss(lambda p, c: c, linear_batch()).item() == pytest.approx(0.01)

    def test_recycle_with_linear_translators(self):
        """Negation commutes with constant-velocity extrapolation, so the loop closes."""
        assert recycle_loss(negate, negate, extrapolate, linear_batch()).item() == pytest.approx(0.0, abs=1e-12)
        assert recycle_loss(identity, negate, extrapolate, linear_batch()).item() > 0.0

    def test_recycle_reduces_to_recurrent_under_identity_translators(self):
        batch = linear_batch()
        predictor = lambda p, c: c * 1.5 - p * 0.25
        recycled = recycle_loss(identity, identity, predictor, batch).item()
        assert abs(recycled - recurrent_loss(predictor, batch).item()) <= 1e-12

    def test_empty_triplets_rejected(self):
        with pytest.raises(ShapeError):
            recurrent_loss(extrapolate, TripletBatch())
        with pytest.raises(ShapeError):
            recycle_loss(identity, identity, extrapolate, TripletBatch())


class TestComposeObjective:
    @pytest.fixture
    def batches(self):
        return linear_batch(), linear_batch(offset=0.2)

    def test_recycle_mode_terms(self, batches):
        objective = compose_objective(NETS, *batches, LossWeights())
        assert sorted(objective.terms) == sorted(
            ["adv_X", "adv_Y", "recycle_X", "recycle_Y", "recurrent_X", "recurrent_Y"]
        )

    def test_combined_mode_adds_cycle(self, batches):
        objective = compose_objective(NETS, *batches, LossWeights(), include_cycle=True)
        assert "cycle_X" in objective.terms and "recycle_X" in objective.terms

    def test_cycle_mode_has_no_temporal_terms(self, batches):
        objective = compose_objective(NETS, *batches, LossWeights(), include_cycle=True, include_recycle=False)
        assert sorted(objective.terms) == ["adv_X", "adv_Y", "cycle_X", "cycle_Y"]

    def test_total_is_weighted_sum(self, batches):
        nets = dict(NETS, P_X=lambda p, c: c, D_Y=constant_judge(0.0))
        weights = LossWeights(lambda_rx=2.0, lambda_tau_x=3.0, adversarial=0.5)
        objective = compose_objective(nets, *batches, weights, include_cycle=True)
        expected = sum(objective.weights_used[name] * term.item() for name, term in objective.terms.items())
        assert objective.total.item() == pytest.approx(expected)
        assert objective.terms["recurrent_X"].item() == pytest.approx(0.01)
        assert objective.terms["adv_Y"].item() == pytest.approx(1.0)

    def test_report_leaves_cycle_unset_without_cycle(self, batches):
        report = total_objective(NETS, *batches, LossWeights())
        assert report.cycle_X is None
        assert report.total == pytest.approx(0.0, abs=1e-12)

    def test_supplied_fakes_are_used(self, batches):
        batch_x, batch_y = batches
        fakes = (batch_y.curr * 0.0, batch_x.curr * 0.0)
        objective = compose_objective(NETS, batch_x, batch_y, LossWeights(), fakes=fakes)
        assert objective.fake_x is fakes[0]
        assert objective.terms["adv_X"].item() == pytest.approx(0.0)

    def test_zero_weights_leave_the_adversarial_total(self, batches):
        weights = LossWeights(
            lambda_rx=0.0,
            lambda_ry=0.0,
            lambda_tau_x=0.0,
            lambda_tau_y=0.0,
            lambda_cycle_x=0.0,
            lambda_cycle_y=0.0,
        )
        nets = dict(NETS, G_X=negate, D_X=constant_judge(0.25), D_Y=lambda x: x * 0.5)
        report = total_objective(nets, *batches, weights, include_cycle=True)
        assert report.recycle_X > 0.0 and report.cycle_Y > 0.0
        assert report.total == report.adv_X + report.adv_Y


class TestObjectiveSymmetry:
    """Swapping the domains, their networks and their weights mirrors every term."""

    NETS = {
        "G_X": lambda x: x * 0.5,
        "G_Y": negate,
        "P_X": extrapolate,
        "P_Y": lambda p, c: c * 1.5 - p * 0.25,
        "D_X": lambda x: x * 0.3,
        "D_Y": lambda x: x * -0.2 + 0.1,
    }
    MIRROR = {"G_X": "G_Y", "G_Y": "G_X", "P_X": "P_Y", "P_Y": "P_X", "D_X": "D_Y", "D_Y": "D_X"}
    WEIGHTS = LossWeights(
        lambda_rx=2.0,
        lambda_ry=5.0,
        lambda_tau_x=1.0,
        lambda_tau_y=3.0,
        lambda_cycle_x=4.0,
        lambda_cycle_y=0.5,
        adversarial=0.7,
    )

    @pytest.mark.parametrize("mode", ["least_squares", "log"])
    def test_swapped_domains_mirror_the_report(self, mode):
        batch_x, batch_y = linear_batch(), linear_batch(n=3, offset=0.2)
        mirrored_nets = {name: self.NETS[other] for name, other in self.MIRROR.items()}
        report = total_objective(self.NETS, batch_x, batch_y, self.WEIGHTS, include_cycle=True, mode=mode)
        mirrored = total_objective(
            mirrored_nets, batch_y, batch_x, self.WEIGHTS.swapped(), include_cycle=True, mode=mode
        )
        for term in ("adv", "recycle", "recurrent", "cycle"):
            assert getattr(report, f"{term}_X") == pytest.approx(getattr(mirrored, f"{term}_Y"), rel=1e-12)
            assert getattr(report, f"{term}_Y") == pytest.approx(getattr(mirrored, f"{term}_X"), rel=1e-12)
        assert report.total == pytest.approx(mirrored.total, rel=1e-12)
        assert report.recycle_X != pytest.approx(report.recycle_Y)
