from typing import Any, List

from src.core.errors import ShapeError
from src.models.config import DiscriminatorConfig
from src.nn import layers
from src.nn.base import AbstractNetwork, ParamSpec
from src.tensor import Tensor, leaky_relu


class PatchDiscriminator(AbstractNetwork):
    """
    PatchGAN: 4x4 convs with LeakyReLU(0.2), instance norm on every layer
    except the first and the last. Each output logit judges one receptive field.
    """

    name = "patch_discriminator"

    def __init__(self, config: DiscriminatorConfig):
        super().__init__(config)

    def _has_norm(self, index: int) -> bool:
        return 0 < index < len(self.config.layer_specs) - 1

    def parameter_specs(self) -> List[ParamSpec]:
        specs: List[ParamSpec] = []
        for i, (in_ch, out_ch, kernel, _) in enumerate(self.config.layer_specs):
            specs += layers.conv_specs(f"layer{i}.conv", out_ch, in_ch, kernel, bias=not self._has_norm(i))
            if self._has_norm(i):
                specs += layers.norm_specs(f"layer{i}.norm", out_ch)
        return specs

    def validate_input(self, image: Tensor) -> None:
        c = self.config
        if image.ndim != 4:
            raise ShapeError(f"discriminator expects [N,C,H,W], got {image.shape}")
        if image.shape[0] == 0:
            raise ShapeError("discriminator received an empty batch")
        if image.shape[1] != c.input_channels:
            raise ShapeError(f"discriminator expects {c.input_channels} channels, got image {image.shape}")
        field = c.receptive_field
        if image.shape[2] < field or image.shape[3] < field:
            raise ShapeError(
                f"input {image.shape[2]}x{image.shape[3]} is smaller than one receptive field ({field}x{field})"
            )

    def forward(self, params: Any, *inputs: Tensor, **options: Any) -> Tensor:
        (image,) = inputs
        self.validate_input(image)

        specs = self.config.layer_specs
        h = image
        for i, (_, _, _, stride) in enumerate(specs):
            h = layers.conv(params, f"layer{i}.conv", h, stride=stride, padding=self.config.padding)
            if i == len(specs) - 1:
                break
            if self._has_norm(i):
                h = layers.norm(params, f"layer{i}.norm", h)
            h = leaky_relu(h, 0.2)
        return h
