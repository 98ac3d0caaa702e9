import unittest

import numpy as np
import pytest

from src.core.errors import CheckpointError, DataError, ShapeError
from src.data import VideoStream, generate_stream, generate_synthetic_domains
from src.eval import (
    OracleSegmenter,
    comparison_table,
    confusion_matrix,
    diversity_probe,
    evaluate_segmenter,
    image_to_labels_metrics,
    infer_framewise,
    infer_smoothed,
    load_segmenter,
    oracle_image_score,
    pooled_seg_metrics,
    predicted_labels,
    save_segmenter,
    seg_metrics,
    segment,
    train_segmenter,
    translation_mse,
)
from src.models.config import GeneratorConfig, SegmenterConfig, SyntheticSceneConfig
from src.models.reports import DiversityReport, EvalReport, SegMetrics
from src.nn import init_params
from src.storage import write_checkpoint
from src.storage.checkpoint import CheckpointData
from src.tensor import Tensor


def identity(x):
    return x


def numpy_map(fn):
    """Wrap an array function as a generator double."""
    return lambda t: Tensor(fn(t.data))


def scene(**kwargs):
    values = dict(image_size=16, frames=12, object_radius=2, shadow_offset=1)
    values.update(kwargs)
    return SyntheticSceneConfig(**values)


class TestSegMetrics(unittest.TestCase):
    def test_hand_computed_case(self):
        gt = np.array([[0, 0], [1, 1]])
        pred = np.array([[0, 1], [1, 1]])
        metrics = seg_metrics(pred, gt, 3)
        self.assertAlmostEqual(metrics.mean_pixel_accuracy, 0.75)
        self.assertAlmostEqual(metrics.average_class_accuracy, 0.75)
        self.assertAlmostEqual(metrics.mean_iou, (0.5 + 2 / 3) / 2, places=4)
        self.assertIsNone(metrics.per_class[2].iou)

    def test_perfect_prediction(self):
        labels = np.random.default_rng(0).integers(0, 3, size=(4, 6, 6))
        metrics = seg_metrics(labels, labels, 3)
        self.assertEqual(
            (metrics.mean_pixel_accuracy, metrics.average_class_accuracy, metrics.mean_iou), (1.0, 1.0, 1.0)
        )

    def test_permutation_covariance(self):
        rng = np.random.default_rng(1)
        gt = rng.integers(0, 3, size=(3, 8, 8))
        pred = rng.integers(0, 3, size=(3, 8, 8))
        relabel = np.array([2, 0, 1])
        a = seg_metrics(pred, gt, 3)
        b = seg_metrics(relabel[pred], relabel[gt], 3)
        self.assertAlmostEqual(a.mean_pixel_accuracy, b.mean_pixel_accuracy)
        self.assertAlmostEqual(a.average_class_accuracy, b.average_class_accuracy)
        self.assertAlmostEqual(a.mean_iou, b.mean_iou)

    def test_pixel_accuracy_bounds_iou(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            gt = rng.integers(0, 4, size=(5, 5))
            pred = np.where(rng.random((5, 5)) < 0.6, gt, rng.integers(0, 4, size=(5, 5)))
            metrics = seg_metrics(pred, gt, 4)
            self.assertGreaterEqual(metrics.mean_pixel_accuracy + 1e-12, metrics.mean_iou)

    def test_pooled_uses_summed_confusion(self):
        rng = np.random.default_rng(3)
        pairs = [(rng.integers(0, 3, size=(4, 4)), rng.integers(0, 3, size=(4, 4))) for _ in range(3)]
        pooled = pooled_seg_metrics(pairs, 3)
        joined = seg_metrics(np.stack([p for p, _ in pairs]), np.stack([g for _, g in pairs]), 3)
        self.assertAlmostEqual(pooled.mean_iou, joined.mean_iou)

    def test_confusion_matrix_orientation(self):
        matrix = confusion_matrix(np.array([1, 1]), np.array([0, 1]), 2)
        np.testing.assert_array_equal(matrix, [[0, 1], [0, 1]])

    def test_rejects_overflow_and_misalignment(self):
        with self.assertRaises(DataError):
            seg_metrics(np.array([3]), np.array([0]), 3)
        with self.assertRaises(ShapeError):
            seg_metrics(np.zeros((2, 2), dtype=int), np.zeros((2, 3), dtype=int), 3)


class TestInference:
    @pytest.fixture
    def ramp(self):
        base = np.random.default_rng(4).uniform(-0.5, 0.5, size=(1, 3, 4, 4))
        frames = base + 0.05 * np.arange(8).reshape(8, 1, 1, 1)
        labels = np.zeros((8, 4, 4), dtype=np.int64)
        return VideoStream(domain="X", frames=frames, labels=labels, stream_id="ramp")

    def test_framewise_switches_domain(self, ramp):
        out = infer_framewise(numpy_map(lambda f: -f), ramp)
        assert out.domain == "Y" and len(out) == len(ramp)
        assert out.labels is None
        np.testing.assert_array_equal(out.frames, -ramp.frames)

    def test_perfect_predictor_leaves_framewise_output(self, ramp):
        smoothed = infer_smoothed(identity, lambda prev, curr: curr * 2.0 - prev, ramp)
        np.testing.assert_allclose(smoothed.frames, ramp.frames, atol=1e-12)

    def test_zero_predictor_halves_later_frames(self, ramp):
        smoothed = infer_smoothed(identity, lambda prev, curr: curr * 0.0, ramp, chunk=3)
        np.testing.assert_array_equal(smoothed.frames[:2], ramp.frames[:2])
        np.testing.assert_allclose(smoothed.frames[2:], ramp.frames[2:] / 2)

    def test_smoothing_needs_three_frames(self, ramp):
        short = ramp.with_frames(ramp.frames[:2].copy(), keep_labels=False)
        with pytest.raises(DataError):
            infer_smoothed(identity, identity, short)

    def test_deterministic_with_real_generator(self):
        params = init_params(GeneratorConfig(image_size=8, base_width=2, n_residual_blocks=1), seed=0)
        stream = VideoStream(domain="X", frames=np.zeros((3, 3, 8, 8), dtype=np.float32))
        a, b = infer_framewise(params, stream), infer_framewise(params, stream)
        np.testing.assert_array_equal(a.frames, b.frames)
        assert np.abs(a.frames).max() <= 1.0


class TestScores:
    def test_translation_mse_is_zero_for_the_true_map(self):
        x, _, gt_map = generate_synthetic_domains(scene(), 1, 2)
        assert translation_mse(numpy_map(gt_map.forward), x, gt_map) == 0.0

    def test_translation_mse_against_a_mirror(self):
        class Mirror:
            def forward(self, frames):
                return frames[..., ::-1]

        x = generate_stream(scene(frames=4), seed=3)
        frames = x.frames.astype(np.float64)
        expected = ((frames - frames[..., ::-1]) ** 2).reshape(4, -1).mean(axis=1).mean()
        assert translation_mse(identity, x, Mirror()) == pytest.approx(expected)
        assert translation_mse(identity, x, Mirror()) <= 4.0

    def test_diversity_limits(self):
        config = scene(shape_swap=False)
        x, _, gt_map = generate_synthetic_domains(config, 1, 2)
        assert diversity_probe(identity, x, 6).ratio == pytest.approx(1.0)
        assert diversity_probe(numpy_map(gt_map.forward), x, 6).ratio == pytest.approx(1.0)
        collapsed = diversity_probe(lambda t: t * 0.0, x, 6)
        assert collapsed.output_dispersion == 0.0 and collapsed.ratio == 0.0

    def test_diversity_sample_bounds(self):
        x = generate_stream(scene(frames=5), seed=1)
        with pytest.raises(DataError):
            diversity_probe(identity, x, 6)
        with pytest.raises(DataError):
            diversity_probe(identity, x, 1)

    def test_labels_task_scores_the_true_map_perfectly(self):
        config = scene(task="image2labels")
        x, _, gt_map = generate_synthetic_domains(config, 1, 2)
        metrics = image_to_labels_metrics(numpy_map(gt_map.forward), x)
        assert metrics.mean_iou == 1.0
        np.testing.assert_array_equal(predicted_labels(numpy_map(gt_map.forward), x), x.labels)

    def test_labels_task_needs_labels(self):
        unlabeled = VideoStream(domain="X", frames=np.zeros((3, 3, 4, 4)))
        with pytest.raises(DataError):
            predicted_labels(identity, unlabeled)


def untrained_oracle(image_size=16, qualified=True):
    config = SegmenterConfig(base_width=2)
    params = init_params(config.network_config(image_size), seed=0)
    metrics = SegMetrics(mean_pixel_accuracy=1.0, average_class_accuracy=1.0, mean_iou=1.0 if qualified else 0.2)
    return OracleSegmenter(params=params, config=config, heldout_metrics=metrics)


class TestOracleScore:
    def test_true_renderer_scores_one(self):
        config = scene(task="image2labels")
        x, _, gt_map = generate_synthetic_domains(config, 1, 2)
        renderer = numpy_map(gt_map.inverse)
        assert oracle_image_score(renderer, x, untrained_oracle()) == pytest.approx(1.0)

    def test_unqualified_oracle_rejected(self):
        x = generate_stream(scene(task="image2labels"), seed=1)
        with pytest.raises(DataError, match="not qualified"):
            oracle_image_score(identity, x, untrained_oracle(qualified=False))

    def test_y_stream_needs_a_way_back_to_real_frames(self):
        _, y, _ = generate_synthetic_domains(scene(task="image2labels"), 1, 2)
        with pytest.raises(DataError, match="real frames"):
            oracle_image_score(identity, y, untrained_oracle())


class TestSegmenter:
    def test_training_saves_and_loads(self, tmp_path):
        stream = generate_stream(scene(), seed=1)
        oracle = train_segmenter([stream], SegmenterConfig(base_width=2, steps=2, batch_size=2), heldout=[stream])
        assert oracle.heldout_metrics is not None
        assert segment(oracle, stream.frames).shape == stream.labels.shape
        restored = load_segmenter(save_segmenter(oracle, tmp_path / "segmenter.rgan"))
        assert restored.params.equals(oracle.params)
        assert restored.heldout_metrics == oracle.heldout_metrics
        assert restored.qualified == oracle.qualified

    def test_requires_labels(self):
        with pytest.raises(DataError):
            train_segmenter([VideoStream(domain="X", frames=np.zeros((3, 3, 16, 16)))])

    def test_load_rejects_other_checkpoints(self, tmp_path):
        path = write_checkpoint(tmp_path / "other.rgan", CheckpointData(header={"kind": "train_state"}))
        with pytest.raises(CheckpointError, match="not a segmenter"):
            load_segmenter(path)

    @pytest.mark.slow
    def test_default_training_qualifies(self):
        config = SyntheticSceneConfig(image_size=32, frames=200)
        train = [generate_stream(config, seed=s) for s in (1, 2)]
        heldout = [generate_stream(config, seed=3)]
        oracle = train_segmenter(train, SegmenterConfig(), heldout=heldout)
        assert oracle.qualified
        assert evaluate_segmenter(oracle, heldout).mean_iou >= 0.9


class TestComparisonTable:
    def test_rows_and_columns(self):
        pooled = SegMetrics(mean_pixel_accuracy=0.9, average_class_accuracy=0.8, mean_iou=0.7)
        reports = {
            "cycle": EvalReport(checkpoint="a", task="image2labels", seg_metrics={"all": pooled}),
            "recycle": EvalReport(
                checkpoint="b",
                task="image2labels",
                seg_metrics={"all": pooled},
                diversity=DiversityReport(input_dispersion=2.0, output_dispersion=1.0, ratio=0.5),
            ),
        }
        table = comparison_table(reports).splitlines()
        assert "cycle" in table[0] and "recycle" in table[0]
        assert table[1].startswith("MP") and "0.9000" in table[1]
        diversity = next(line for line in table if line.startswith("diversity ratio"))
        assert diversity.split()[-2:] == ["-", "0.5000"]
        assert not any(line.startswith("oracle score") for line in table)
