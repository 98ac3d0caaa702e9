import csv
import unittest
from collections import OrderedDict

import numpy as np
import pytest

from src.core.errors import ConfigError, DataError, DivergenceError, NumericalError
from src.data import VideoStream, generate_synthetic_domains, sample_triplets
from src.losses import adversarial_loss
from src.models.config import LossWeights, SyntheticSceneConfig, TrainConfig
from src.nn import generator_forward
from src.tensor import Tensor, no_grad
from src.train import (
    AdamState,
    ImagePool,
    adam_update,
    fit,
    init_train_state,
    load_checkpoint,
    lr_at,
    save_checkpoint,
    train_step,
    trainable_nets,
)


def tiny_config(**kwargs):
    values = dict(
        steps=3,
        batch_size=1,
        pool_size=2,
        checkpoint_interval=0,
        log_interval=1,
        decay_start=100,
        image_size=8,
        generator_width=4,
        n_residual_blocks=1,
        discriminator_width=4,
        predictor_width=4,
    )
    values.update(kwargs)
    return TrainConfig(**values)


def random_stream(domain, seed, frames=6, size=8):
    rng = np.random.default_rng(seed)
    return VideoStream(
        domain=domain,
        frames=rng.uniform(-1.0, 1.0, size=(frames, 3, size, size)).astype(np.float32),
        stream_id=f"{domain.lower()}{seed}",
    )


@pytest.fixture
def streams():
    return random_stream("X", 1), random_stream("Y", 2)


def same_state(a, b):
    return all(a[net].equals(b[net]) for net in a.nets)


class TestSchedule(unittest.TestCase):
    def test_constant_then_linear(self):
        config = TrainConfig(steps=10, lr=1.0, decay_start=4)
        self.assertEqual([lr_at(s, config) for s in (0, 3, 4)], [1.0, 1.0, 1.0])
        self.assertAlmostEqual(lr_at(7, config), 0.5)
        self.assertAlmostEqual(lr_at(10, config), 0.0)

    def test_default_decay_starts_halfway(self):
        config = TrainConfig(steps=8, lr=2.0)
        self.assertEqual(lr_at(3, config), 2.0)
        self.assertAlmostEqual(lr_at(6, config), 1.0)


class TestAdam(unittest.TestCase):
    def setUp(self):
        self.params = OrderedDict(w=Tensor(np.array([1.0, -1.0]), dtype="float64"))
        self.moments = AdamState.zeros_like(self.params)

    def test_first_step_moves_by_lr_against_the_gradient(self):
        adam_update(self.params, {"w": np.array([0.3, -5.0])}, self.moments, lr=0.1)
        np.testing.assert_allclose(self.params["w"].data, [0.9, -0.9], atol=1e-6)
        self.assertEqual(self.moments.t, 1)

    def test_non_finite_gradient_rejects_step(self):
        with self.assertRaisesRegex(NumericalError, "parameter w"):
            adam_update(self.params, {"w": np.array([np.nan, 0.0])}, self.moments, lr=0.1)
        np.testing.assert_array_equal(self.params["w"].data, [1.0, -1.0])
        self.assertEqual(self.moments.t, 0)

    def test_missing_gradient_counts_as_zero(self):
        adam_update(self.params, {}, self.moments, lr=0.1)
        np.testing.assert_array_equal(self.params["w"].data, [1.0, -1.0])


class TestImagePool:
    def test_disabled_pool_passes_through(self):
        pool = ImagePool(0)
        fakes = np.ones((2, 3, 4, 4))
        np.testing.assert_array_equal(pool.query(fakes, np.random.default_rng(0)), fakes)
        assert len(pool) == 0

    def test_fills_then_swaps(self):
        pool = ImagePool(2)
        rng = np.random.default_rng(0)
        first = pool.query(np.zeros((2, 1, 1, 1)), rng)
        np.testing.assert_array_equal(first, np.zeros((2, 1, 1, 1)))
        assert len(pool) == 2
        seen = [pool.query(np.full((1, 1, 1, 1), float(i + 1)), rng)[0, 0, 0, 0] for i in range(40)]
        assert len(pool) == 2
        assert any(value != i + 1 for i, value in enumerate(seen))
        assert any(value == i + 1 for i, value in enumerate(seen))

    def test_as_array_when_empty(self):
        like = np.zeros((1, 3, 8, 8), dtype=np.float32)
        assert ImagePool(4).as_array(like).shape == (0, 3, 8, 8)

    def test_overfull_restore_rejected(self):
        with pytest.raises(ValueError):
            ImagePool(1, np.zeros((2, 3, 4, 4)))


class TestTrainStep:
    def test_trainable_nets_follow_loss_mode(self):
        assert trainable_nets(init_train_state(tiny_config(loss_mode="cycle"))) == ["G_X", "G_Y"]
        assert trainable_nets(init_train_state(tiny_config())) == ["G_X", "G_Y", "P_X", "P_Y"]

    def test_step_updates_every_network(self, streams):
        state = init_train_state(tiny_config())
        before = {net: params.copy() for net, params in state.nets.items()}
        batch_x = sample_triplets(streams[0], 1, 0)
        batch_y = sample_triplets(streams[1], 1, 1)
        state, report = train_step(state, batch_x, batch_y)
        assert state.step == 1
        assert all(not state[net].equals(before[net]) for net in state.nets)
        assert report.cycle_X is None
        assert report.disc_X is not None and np.isfinite(report.total)

    def test_cycle_mode_leaves_predictors_untouched(self, streams):
        config = tiny_config(loss_mode="cycle")
        untouched = init_train_state(config)
        result = fit(config, *streams)
        assert result.state["P_X"].equals(untouched["P_X"])
        assert result.state["P_Y"].equals(untouched["P_Y"])
        assert not result.state["G_Y"].equals(untouched["G_Y"])
        assert result.reports[-1].cycle_X is not None
        assert result.reports[-1].recycle_X == 0.0

    def test_non_finite_weights_diverge(self, streams):
        state = init_train_state(tiny_config())
        key = next(iter(state["G_Y"]))
        state["G_Y"].assign(key, np.full(state["G_Y"][key].shape, np.nan))
        with pytest.raises(DivergenceError, match="step 0"):
            train_step(state, sample_triplets(streams[0], 1, 0), sample_triplets(streams[1], 1, 0))


class TestFit:
    def test_same_seed_same_weights(self, streams):
        a = fit(tiny_config(), *streams).state
        b = fit(tiny_config(), *streams).state
        assert same_state(a, b)
        c = fit(tiny_config(seed=1), *streams).state
        assert not same_state(a, c)

    def test_resume_matches_uninterrupted_run(self, tmp_path, streams):
        straight = fit(tiny_config(steps=4), *streams, run_dir=tmp_path / "straight")
        first = fit(tiny_config(steps=2), *streams, run_dir=tmp_path / "split")
        resumed = fit(
            tiny_config(steps=4), *streams, run_dir=tmp_path / "split", resume_from=first.checkpoint_path
        )
        assert resumed.state.step == 4
        assert same_state(straight.state, resumed.state)
        with (tmp_path / "split" / "loss.csv").open() as handle:
            rows = list(csv.reader(handle))
        assert len(rows) == 5
        assert [row[0] for row in rows[1:]] == ["0", "1", "2", "3"]

    def test_resume_under_the_default_schedule(self, tmp_path, streams):
        straight = fit(tiny_config(steps=6, decay_start=None), *streams)
        assert straight.state.config.decay_start == 3
        interrupted = fit(tiny_config(steps=6, decay_start=None, checkpoint_interval=4), *streams, run_dir=tmp_path)
        resumed = fit(
            tiny_config(steps=6, decay_start=None), *streams, resume_from=tmp_path / "checkpoint_000004.rgan"
        )
        assert interrupted.state.step == 6
        assert same_state(straight.state, resumed.state)

    def test_more_steps_under_the_default_schedule_rejected(self, tmp_path, streams):
        first = fit(tiny_config(steps=3, decay_start=None), *streams, run_dir=tmp_path)
        assert load_checkpoint(first.checkpoint_path).config.decay_start == 1
        with pytest.raises(ConfigError, match="decay_start"):
            fit(tiny_config(steps=6, decay_start=None), *streams, resume_from=first.checkpoint_path)

    def test_more_steps_with_a_pinned_decay_start(self, tmp_path, streams):
        straight = fit(tiny_config(steps=6, decay_start=2), *streams)
        first = fit(tiny_config(steps=3, decay_start=2), *streams, run_dir=tmp_path)
        resumed = fit(tiny_config(steps=6, decay_start=2), *streams, resume_from=first.checkpoint_path)
        assert same_state(straight.state, resumed.state)

    def test_more_steps_after_decay_began_rejected(self, tmp_path, streams):
        first = fit(tiny_config(steps=4, decay_start=1), *streams, run_dir=tmp_path)
        with pytest.raises(ConfigError, match="already decayed"):
            fit(tiny_config(steps=8, decay_start=1), *streams, resume_from=first.checkpoint_path)

    def test_rejected_update_diverges_with_last_report(self, monkeypatch, streams):
        real_update = adam_update
        calls = []

        def failing_update(params, *args, **kwargs):
            calls.append(getattr(params, "name", None))
            if len(calls) > 6:
                raise NumericalError("non-finite gradient; step rejected")
            return real_update(params, *args, **kwargs)

        monkeypatch.setattr("src.train.step.adam_update", failing_update)
        with pytest.raises(DivergenceError, match="step 1") as info:
            fit(tiny_config(steps=3), *streams)
        assert info.value.step == 1
        assert info.value.last_report is not None

    def test_resume_with_changed_weights_rejected(self, tmp_path, streams):
        first = fit(tiny_config(steps=1), *streams, run_dir=tmp_path)
        with pytest.raises(ConfigError, match="lr"):
            fit(tiny_config(steps=2, lr=1e-3), *streams, resume_from=first.checkpoint_path)

    def test_periodic_checkpoints(self, tmp_path, streams):
        fit(tiny_config(steps=4, checkpoint_interval=2), *streams, run_dir=tmp_path)
        assert (tmp_path / "checkpoint_000002.rgan").exists()
        assert not (tmp_path / "checkpoint_000004.rgan").exists()
        assert load_checkpoint(tmp_path / "checkpoint.rgan").step == 4

    def test_several_streams_per_domain(self, streams):
        result = fit(tiny_config(steps=2), [streams[0], random_stream("X", 3)], [streams[1]])
        assert result.state.step == 2

    def test_wrong_frame_size_rejected(self, streams):
        with pytest.raises(DataError, match="image_size is 8"):
            fit(tiny_config(), random_stream("X", 1, size=12), streams[1])

    def test_too_short_stream_rejected(self, streams):
        with pytest.raises(DataError, match="needs 3"):
            fit(tiny_config(), random_stream("X", 1, frames=2), streams[1])


class TestCheckpointState:
    def test_round_trip_is_exact(self, tmp_path, streams):
        state = fit(tiny_config(steps=2), *streams).state
        path = save_checkpoint(state, tmp_path / "c.rgan")
        restored = load_checkpoint(path)
        assert same_state(state, restored)
        assert restored.step == 2
        assert restored.config == state.config
        assert len(restored.pools["X"]) == len(state.pools["X"])
        assert restored.rng.random() == state.rng.random()
        for net in state.nets:
            assert restored.moments[net].t == state.moments[net].t

    def test_saving_twice_gives_identical_bytes(self, tmp_path):
        state = init_train_state(tiny_config())
        a = save_checkpoint(state, tmp_path / "a.rgan").read_bytes()
        b = save_checkpoint(state, tmp_path / "b.rgan").read_bytes()
        assert a == b


class TestDegenerateRuns:
    def test_zero_objective_leaves_parameters_unchanged(self, streams):
        silent = LossWeights(
            lambda_rx=0.0,
            lambda_ry=0.0,
            lambda_tau_x=0.0,
            lambda_tau_y=0.0,
            lambda_cycle_x=0.0,
            lambda_cycle_y=0.0,
            adversarial=0.0,
        )
        config = tiny_config(weights=silent, loss_mode="combined")
        result = fit(config, *streams)
        assert result.state.step == 3
        assert same_state(result.state, init_train_state(config))

    def test_zero_steps_saves_the_initialization(self, tmp_path, streams):
        result = fit(tiny_config(steps=0), *streams, run_dir=tmp_path)
        assert result.reports == []
        assert same_state(load_checkpoint(result.checkpoint_path), init_train_state(tiny_config(steps=0)))
        with result.loss_csv.open() as handle:
            assert len(list(csv.reader(handle))) == 1


def current_fakes(state, batch_x, batch_y):
    """What the generators make of one batch before the step changes them."""
    with no_grad():
        fake_y = generator_forward(state["G_Y"], batch_x.curr)
        fake_x = generator_forward(state["G_X"], batch_y.curr)
        return fake_x, fake_y


@pytest.mark.slow
class TestTrainingDynamics:
    def test_discriminator_improves_on_its_own_batch(self, streams):
        state = init_train_state(tiny_config(steps=100, decay_start=100, pool_size=0, image_size=8))
        improved = 0
        for step in range(100):
            batch_x = sample_triplets(streams[0], 1, 2 * step)
            batch_y = sample_triplets(streams[1], 1, 2 * step + 1)
            fake_x, fake_y = current_fakes(state, batch_x, batch_y)
            with no_grad():
                before = adversarial_loss(state["D_X"], batch_x.curr, fake_x).item() + adversarial_loss(
                    state["D_Y"], batch_y.curr, fake_y
                ).item()
            state, _ = train_step(state, batch_x, batch_y)
            with no_grad():
                after = adversarial_loss(state["D_X"], batch_x.curr, fake_x).item() + adversarial_loss(
                    state["D_Y"], batch_y.curr, fake_y
                ).item()
            improved += after <= before
        assert improved >= 80

    def test_recycle_term_halves_on_the_synthetic_task(self):
        scene = SyntheticSceneConfig(image_size=32, frames=500)
        stream_x, stream_y, _ = generate_synthetic_domains(scene, 1, 2)
        config = TrainConfig(
            steps=2000,
            image_size=32,
            generator_width=16,
            n_residual_blocks=2,
            discriminator_width=16,
            predictor_width=16,
            checkpoint_interval=0,
        )
        reports = fit(config, stream_x, stream_y).reports
        recycle = np.array([r.recycle_X + r.recycle_Y for r in reports])
        assert recycle[-50:].mean() <= 0.5 * recycle[:50].mean()
