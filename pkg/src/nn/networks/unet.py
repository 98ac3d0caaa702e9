from typing import Any, List

from src.core.errors import ShapeError
from src.models.config import UNetConfig
from src.nn import layers
from src.nn.base import AbstractNetwork, ParamSpec
from src.tensor import Tensor, concat, leaky_relu, relu, scale, tanh


class UNet(AbstractNetwork):
    """
    Encoder-decoder with skip connections, 4x4 stride-2 convs on both sides.

    Encoder level i halves the resolution; the decoder mirrors it and concatenates
    the matching encoder activation before every upsampling except the innermost.
    The outermost and innermost downsampling convs have no norm (and so keep a
    bias), as does the output layer.
    """

    name = "unet"

    def __init__(self, config: UNetConfig):
        super().__init__(config)
        self.depth = config.resolved_depth

    def _down_has_norm(self, level: int) -> bool:
        return 0 < level < self.depth - 1

    def _up_has_norm(self, level: int) -> bool:
        return level > 0

    def _up_in_channels(self, level: int) -> int:
        width = self.config.width_at(level)
        return width if level == self.depth - 1 else 2 * width

    def _up_out_channels(self, level: int) -> int:
        return self.config.output_channels if level == 0 else self.config.width_at(level - 1)

    def parameter_specs(self) -> List[ParamSpec]:
        c = self.config
        specs: List[ParamSpec] = []
        in_ch = c.input_channels
        for level in range(self.depth):
            out_ch = c.width_at(level)
            norm = self._down_has_norm(level)
            specs += layers.conv_specs(f"down{level}.conv", out_ch, in_ch, 4, bias=not norm)
            if norm:
                specs += layers.norm_specs(f"down{level}.norm", out_ch)
            in_ch = out_ch
        for level in reversed(range(self.depth)):
            out_ch = self._up_out_channels(level)
            norm = self._up_has_norm(level)
            specs += layers.conv_transpose_specs(
                f"up{level}.conv", self._up_in_channels(level), out_ch, 4, bias=not norm
            )
            if norm:
                specs += layers.norm_specs(f"up{level}.norm", out_ch)
        return specs

    def validate_input(self, image: Tensor) -> None:
        c = self.config
        if image.ndim != 4:
            raise ShapeError(f"U-Net expects [N,C,H,W], got {image.shape}")
        if image.shape[1] != c.input_channels:
            raise ShapeError(f"U-Net expects {c.input_channels} input channels, got {image.shape}")
        if image.shape[2] != c.image_size or image.shape[3] != c.image_size:
            raise ShapeError(
                f"image size {image.shape[2]}x{image.shape[3]} does not match U-Net image_size {c.image_size}"
            )

    def forward(self, params: Any, *inputs: Tensor, zero_bottleneck: bool = False, **options: Any) -> Tensor:
        """
        Args:
            zero_bottleneck: Multiply the innermost activations by zero, leaving
                only the skip connections to carry the input (probe only)
        """
        (image,) = inputs
        self.validate_input(image)

        skips: List[Tensor] = []
        h = image
        for level in range(self.depth):
            if level > 0:
                h = leaky_relu(h, 0.2)
            h = layers.conv(params, f"down{level}.conv", h, stride=2, padding=1)
            if self._down_has_norm(level):
                h = layers.norm(params, f"down{level}.norm", h)
            skips.append(h)

        if zero_bottleneck:
            h = scale(h, 0.0)
        for level in reversed(range(self.depth)):
            if level < self.depth - 1:
                h = concat([skips[level], h], axis=1)
            h = layers.conv_transpose(params, f"up{level}.conv", relu(h), stride=2, padding=1)
            if self._up_has_norm(level):
                h = layers.norm(params, f"up{level}.norm", h)

        if self.config.final_activation == "tanh":
            return tanh(h)
        return h
