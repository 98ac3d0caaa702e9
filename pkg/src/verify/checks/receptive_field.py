"""The discriminator's receptive field, by the layer recurrence and by gradient support."""

from typing import List

import numpy as np

from src.models.config import DiscriminatorConfig
from src.models.reports import CheckResult
from src.nn import discriminator_forward, receptive_field
from src.tensor import GradTape, Tensor
from src.verify.base import AbstractCheck
from src.verify.probes import conv_stack_support, random_params

EXPECTED_FIELD = 70


class ReceptiveFieldCheck(AbstractCheck):
    name = "receptive_field"
    description = "PatchGAN logits each see exactly 70x70 input pixels"

    def __init__(self, config=None):
        super().__init__(config)
        # narrow layers keep the probe fast; the field does not depend on width
        self.probe = DiscriminatorConfig(input_channels=1, base_width=2, padding=0, image_size=86, precision="float64")

    def cases(self) -> List[str]:
        return ["recurrence", "gradient_support", "single_patch"]

    def run_case(self, case: str) -> CheckResult:
        rng = np.random.default_rng(self.seed)
        if case == "recurrence":
            field = receptive_field(DiscriminatorConfig())
            return self.expect(case, field == EXPECTED_FIELD, f"recurrence gives {field}, expected 70", field)

        if case == "gradient_support":
            height, width = conv_stack_support(self.probe, self.probe.image_size, rng)
            return self.expect(
                case,
                height == width == EXPECTED_FIELD,
                f"central logit depends on a {height}x{width} input region, expected 70x70",
                float(height),
            )

        # one 70x70 input through the full network, normalization included
        config = self.probe.model_copy(update={"image_size": EXPECTED_FIELD})
        params = random_params(config, rng)
        x = Tensor(rng.normal(size=(1, 1, EXPECTED_FIELD, EXPECTED_FIELD)), requires_grad=True)
        with GradTape() as tape:
            logits = discriminator_forward(params, x)
            tape.backward(logits.sum(), inputs=[x])
        params.clear_grad()
        covered = int(np.count_nonzero(x.grad))
        return self.expect(
            case,
            logits.shape[2:] == (1, 1) and covered == EXPECTED_FIELD**2,
            f"70x70 input gave logits {logits.shape[2:]} with {covered} influencing pixels",
            float(covered),
        )
