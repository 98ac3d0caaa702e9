"""End-to-end runs of the command line on a tiny synthetic dataset."""

import csv
import json

import pytest
import toml

from src.commands import COMMANDS
from src.core.constants import Constants
from src.core.errors import DivergenceError
from src.main import main
from src.storage import load_stream, read_manifest
from src.train import load_checkpoint
from src.verify import corrupted_gradient

TINY = {
    "image_size": 16,
    "frames": 8,
    "eval_frames": 6,
    "diversity_sample": 4,
    "scene": {"object_radius": 2, "shadow_offset": 1},
    "train": {
        "steps": 2,
        "pool_size": 1,
        "checkpoint_interval": 0,
        "log_interval": 1,
        "generator_width": 4,
        "n_residual_blocks": 1,
        "discriminator_width": 4,
        "predictor_width": 4,
    },
    "segmenter": {"base_width": 2, "steps": 2, "batch_size": 2},
}


def write_conf(path, **extra):
    data = dict(TINY, **extra)
    with path.open("w") as f:
        toml.dump(data, f)
    return str(path)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """A dataset and a two-step run shared by the read-only tests below."""
    root = tmp_path_factory.mktemp("cli")
    conf = write_conf(root / "tiny.toml")
    data_dir, run_dir = root / "data", root / "run"
    assert main(["--conf", conf, "gen-data", "--data-dir", str(data_dir)]) == 0
    assert main(["--conf", conf, "train", "--data-dir", str(data_dir), "--run-dir", str(run_dir)]) == 0
    return conf, data_dir, run_dir


class TestGenData:
    def test_dataset_layout(self, trained):
        _, data_dir, _ = trained
        entries = read_manifest(data_dir)
        assert [(e.domain, e.stream_id, e.frames) for e in entries] == [("X", "day", 8), ("Y", "day", 8)]
        assert (data_dir / "config.toml").exists()
        x = load_stream(data_dir / "X" / "day", domain="X")
        assert x.frames.shape == (8, 3, 16, 16)
        assert x.labels is not None

    def test_non_empty_directory_needs_force(self, tmp_path):
        conf = write_conf(tmp_path / "tiny.toml")
        data_dir = tmp_path / "data"
        data_dir.mkdir()
        (data_dir / "keep.txt").write_text("x")
        assert main(["--conf", conf, "gen-data", "--data-dir", str(data_dir)]) == Constants.EXIT_VALIDATION
        assert (data_dir / "keep.txt").exists()
        assert main(["--conf", conf, "gen-data", "--data-dir", str(data_dir), "--force"]) == Constants.EXIT_OK
        assert not (data_dir / "keep.txt").exists()

    def test_conditions_give_one_stream_each(self, tmp_path):
        conf = write_conf(tmp_path / "tiny.toml")
        data_dir = tmp_path / "data"
        assert main(["--conf", conf, "gen-data", "--data-dir", str(data_dir), "--conditions", "day,night"]) == 0
        entries = read_manifest(data_dir)
        assert [(e.domain, e.condition) for e in entries] == [
            ("X", "day"),
            ("X", "night"),
            ("Y", "day"),
            ("Y", "night"),
        ]

    def test_invalid_config_exits_with_validation_code(self, tmp_path):
        conf = write_conf(tmp_path / "bad.toml", colour="blue")
        assert main(["--conf", conf, "gen-data", "--data-dir", str(tmp_path / "d")]) == Constants.EXIT_VALIDATION


class TestTrain:
    def test_artifacts(self, trained):
        _, _, run_dir = trained
        state = load_checkpoint(run_dir / "checkpoint.rgan")
        assert state.step == 2
        assert state.config.image_size == 16
        with (run_dir / "loss.csv").open() as handle:
            rows = list(csv.DictReader(handle))
        assert [row["step"] for row in rows] == ["0", "1"]
        assert (run_dir / "config.toml").exists()

    def test_single_step_cycle_run(self, trained, tmp_path):
        conf, data_dir, _ = trained
        run_dir = tmp_path / "cycle"
        argv = ["--conf", conf, "train", "--data-dir", str(data_dir), "--run-dir", str(run_dir)]
        assert main(argv + ["--steps", "1", "--loss", "cycle"]) == 0
        with (run_dir / "loss.csv").open() as handle:
            assert len(list(csv.reader(handle))) == 2
        state = load_checkpoint(run_dir / "checkpoint.rgan")
        assert state.config.loss_mode == "cycle"

    def test_resume_matches_a_straight_run(self, trained, tmp_path):
        conf, data_dir, run_dir = trained
        pinned = ["--conf", conf, "--set", "train.decay_start=1", "train", "--data-dir", str(data_dir)]
        resumed_dir, straight_dir = tmp_path / "resumed", tmp_path / "straight"
        resume = ["--resume", str(run_dir / "checkpoint.rgan")]
        assert main(pinned + ["--run-dir", str(resumed_dir), "--steps", "3"] + resume) == 0
        assert main(pinned + ["--run-dir", str(straight_dir), "--steps", "3"]) == 0
        resumed = load_checkpoint(resumed_dir / "checkpoint.rgan")
        straight = load_checkpoint(straight_dir / "checkpoint.rgan")
        assert resumed.step == 3
        assert all(resumed[net].equals(straight[net]) for net in straight.nets)

    def test_resume_with_more_steps_needs_explicit_decay(self, trained, tmp_path, capsys):
        conf, data_dir, run_dir = trained
        argv = ["--conf", conf, "train", "--data-dir", str(data_dir), "--run-dir", str(tmp_path / "resumed")]
        assert main(argv + ["--steps", "3", "--resume", str(run_dir / "checkpoint.rgan")]) == Constants.EXIT_VALIDATION
        assert "decay_start" in capsys.readouterr().err

    def test_missing_dataset(self, tmp_path):
        conf = write_conf(tmp_path / "tiny.toml")
        argv = ["--conf", conf, "train", "--data-dir", str(tmp_path / "absent"), "--run-dir", str(tmp_path / "r")]
        assert main(argv) == Constants.EXIT_VALIDATION


class TestInfer:
    def run_infer(self, trained, output, *flags):
        conf, data_dir, run_dir = trained
        argv = ["--conf", conf, "infer", "--run-dir", str(run_dir), "--data-dir", str(data_dir)]
        return main(argv + ["--output", str(output), *flags])

    def test_framewise_output(self, trained, tmp_path):
        assert self.run_infer(trained, tmp_path / "out") == 0
        generated = load_stream(tmp_path / "out", domain="Y")
        assert len(generated) == 8
        sidecar = (tmp_path / "out" / Constants.SIDECAR_NAME).read_text()
        assert "mode = framewise" in sidecar
        assert "source_domain = X" in sidecar and "target_domain = Y" in sidecar

    def test_smoothed_output_and_determinism(self, trained, tmp_path):
        assert self.run_infer(trained, tmp_path / "a", "--smooth") == 0
        assert self.run_infer(trained, tmp_path / "b", "--smooth") == 0
        assert "mode = smoothed" in (tmp_path / "a" / Constants.SIDECAR_NAME).read_text()
        for name in ("frame_000000.ppm", "frame_000007.ppm"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_translating_domain_y(self, trained, tmp_path):
        assert self.run_infer(trained, tmp_path / "out", "--domain", "Y") == 0
        assert len(load_stream(tmp_path / "out", domain="X")) == 8

    def test_image_size_mismatch_rejected(self, trained, tmp_path):
        conf, _, run_dir = trained
        other = tmp_path / "data24"
        assert main(["--conf", conf, "gen-data", "--data-dir", str(other), "--image-size", "24"]) == 0
        argv = ["--conf", conf, "infer", "--run-dir", str(run_dir), "--data-dir", str(other)]
        assert main(argv + ["--output", str(tmp_path / "out")]) == Constants.EXIT_VALIDATION

    def test_missing_checkpoint(self, trained, tmp_path):
        conf, data_dir, _ = trained
        argv = ["--conf", conf, "infer", "--checkpoint", str(tmp_path / "none.rgan"), "--data-dir", str(data_dir)]
        assert main(argv) == Constants.EXIT_VALIDATION


class TestEval:
    def test_single_checkpoint_report(self, trained, tmp_path):
        conf, data_dir, run_dir = trained
        argv = ["--conf", conf, "eval", "--run-dir", str(run_dir), "--data-dir", str(data_dir)]
        assert main(argv + ["--output", str(tmp_path)]) == 0
        reports = json.loads((tmp_path / "eval_report.json").read_text())
        assert len(reports) == 1
        assert reports[0]["checkpoint"] == "run"
        assert reports[0]["translation_mse"] >= 0.0
        assert 0.0 <= reports[0]["diversity"]["ratio"]
        assert (tmp_path / "eval.csv").exists()
        assert not (tmp_path / "comparison.txt").exists()

    def test_comparison_table(self, trained, tmp_path):
        conf, data_dir, run_dir = trained
        checkpoint = str(run_dir / "checkpoint.rgan")
        argv = ["--conf", conf, "eval", "--checkpoint", checkpoint, "--compare", checkpoint]
        assert main(argv + ["--data-dir", str(data_dir), "--output", str(tmp_path)]) == 0
        header = (tmp_path / "comparison.txt").read_text().splitlines()[0]
        assert "run" in header and "run'" in header

    def test_labels_task(self, tmp_path):
        conf = write_conf(tmp_path / "tiny.toml", scene=dict(TINY["scene"], task="image2labels"))
        data_dir, run_dir = tmp_path / "data", tmp_path / "run"
        assert main(["--conf", conf, "gen-data", "--data-dir", str(data_dir)]) == 0
        assert main(["--conf", conf, "train", "--data-dir", str(data_dir), "--run-dir", str(run_dir)]) == 0
        assert main(["--conf", conf, "eval", "--run-dir", str(run_dir), "--data-dir", str(data_dir)]) == 0
        report = json.loads((run_dir / "eval_report.json").read_text())[0]
        assert set(report["seg_metrics"]) == {"day", "all"}
        metrics = report["seg_metrics"]["all"]
        assert 0.0 <= metrics["mean_iou"] <= metrics["mean_pixel_accuracy"] + 1e-12
        assert (run_dir / "segmenter.rgan").exists()

    def test_missing_checkpoint(self, tmp_path):
        conf = write_conf(tmp_path / "tiny.toml")
        assert main(["--conf", conf, "eval", "--run-dir", str(tmp_path)]) == Constants.EXIT_VALIDATION


class TestVerify:
    def test_subset_passes(self):
        assert main(["verify", "--checks", "receptive_field,loss_identities"]) == Constants.EXIT_OK

    def test_corrupted_gradient_fails(self, capsys):
        with corrupted_gradient("conv2d"):
            code = main(["verify", "--checks", "primitive_gradients"])
        assert code == Constants.EXIT_VALIDATION
        assert "❌ primitive_gradients/conv2d_input" in capsys.readouterr().out

    def test_unknown_check(self):
        assert main(["verify", "--checks", "bogus"]) == Constants.EXIT_VALIDATION


class TestExitCodes:
    def test_numerical_failure_exit_code(self, monkeypatch):
        def diverge(config):
            raise DivergenceError("loss became nan", step=3)

        monkeypatch.setitem(COMMANDS, "verify", diverge)
        assert main(["verify"]) == Constants.EXIT_NUMERICAL

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            main([])


def test_reruns_are_identical(trained, tmp_path):
    conf, data_dir, _ = trained
    for name in ("a", "b"):
        argv = ["--conf", conf, "train", "--data-dir", str(data_dir), "--run-dir", str(tmp_path / name)]
        assert main(argv) == 0
    a = load_checkpoint(tmp_path / "a" / "checkpoint.rgan")
    b = load_checkpoint(tmp_path / "b" / "checkpoint.rgan")
    assert all(a[net].equals(b[net]) for net in a.nets)
    assert (tmp_path / "a" / "loss.csv").read_text() == (tmp_path / "b" / "loss.csv").read_text()
