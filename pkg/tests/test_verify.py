import numpy as np
import pytest

from src.core.errors import ConfigError
from src.models.reports import CheckResult, VerifyReport
from src.tensor import Tensor, relu
from src.verify import check_registry, corrupted_gradient, run_verification
from src.verify.base import AbstractCheck
from src.verify.pipeline import VerificationPipeline
from src.verify.probes import sampled_gradient_check


class ExplodingCheck(AbstractCheck):
    name = "exploding"

    def cases(self):
        return ["fine", "boom"]

    def run_case(self, case):
        if case == "boom":
            raise RuntimeError("kaboom")
        return self.below(case, 0.0)


class TestRegistry:
    def test_every_check_is_discovered(self):
        assert check_registry.names() == sorted(
            [
                "conv_adjointness",
                "loss_gradients",
                "loss_identities",
                "network_gradients",
                "primitive_gradients",
                "receptive_field",
            ]
        )

    def test_unknown_check_rejected(self):
        with pytest.raises(ConfigError, match="no_such_check"):
            run_verification(["no_such_check"])

    def test_non_check_class_rejected(self):
        with pytest.raises(ValueError):
            check_registry.register(dict)


class TestPipeline:
    def test_exception_becomes_failed_case(self):
        report = VerificationPipeline([ExplodingCheck()]).run()
        assert [r.label for r in report.results] == ["exploding/fine", "exploding/boom"]
        assert [r.label for r in report.failures] == ["exploding/boom"]
        assert "kaboom" in report.failures[0].message

    def test_non_finite_value_fails(self):
        result = ExplodingCheck().below("nan", float("nan"))
        assert not result.passed

    def test_report_passes_only_when_every_case_does(self):
        ok = CheckResult(check="a", case="b", passed=True)
        bad = CheckResult(check="a", case="c", passed=False)
        assert VerifyReport(results=[ok]).passed
        assert not VerifyReport(results=[ok, bad]).passed


class TestSuite:
    def test_fast_checks_pass(self):
        report = run_verification(["conv_adjointness", "loss_identities", "receptive_field"], {"seed": 0})
        assert report.results
        assert report.passed, [f"{r.label}: {r.message}" for r in report.failures]

    def test_corrupted_conv_gradient_is_named(self):
        with corrupted_gradient("conv2d"):
            report = run_verification(["primitive_gradients"], {"seed": 0})
        labels = [r.label for r in report.failures]
        assert "primitive_gradients/conv2d_input" in labels
        assert all(label.startswith("primitive_gradients/conv2d") for label in labels)

    def test_corruption_is_scoped(self):
        with corrupted_gradient("tanh"):
            pass
        report = run_verification(["primitive_gradients"], {"seed": 0})
        assert report.passed, [f"{r.label}: {r.message}" for r in report.failures]

    @pytest.mark.slow
    def test_full_suite_passes(self):
        report = run_verification(config={"seed": 0})
        assert report.passed, [f"{r.label}: {r.message}" for r in report.failures]


class TestSampledGradientCheck:
    def test_kink_coordinates_are_replaced(self):
        x = Tensor(np.concatenate([np.zeros(12), [0.7, 0.4]]), dtype="float64")
        result = sampled_gradient_check(lambda t: relu(t).sum(), x, np.random.default_rng(0), 2, 1e-5)
        assert result.checked == 2
        assert result.passed(1e-6)

    def test_only_kinks_fails(self):
        x = Tensor(np.zeros(6), dtype="float64")
        result = sampled_gradient_check(lambda t: relu(t).sum(), x, np.random.default_rng(0), 2, 1e-5)
        assert result.checked == 0
        assert not result.passed(1e-6)
        assert "kinks" in result.message
