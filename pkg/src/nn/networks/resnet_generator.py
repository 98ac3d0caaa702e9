from typing import Any, List

from src.core.errors import ShapeError
from src.models.config import GeneratorConfig
from src.nn import layers
from src.nn.base import AbstractNetwork, ParamSpec
from src.tensor import Tensor, relu, tanh


class ResnetGenerator(AbstractNetwork):
    """
    7x7 conv, two stride-2 convs, residual blocks, two stride-2 transposed
    convs, 7x7 conv, tanh. Instance norm and ReLU follow every conv but the last.

    Convs that feed an instance norm carry no bias; the norm's shift replaces it.
    """

    name = "resnet_generator"

    def __init__(self, config: GeneratorConfig):
        super().__init__(config)

    def parameter_specs(self) -> List[ParamSpec]:
        c = self.config
        w = c.base_width
        specs = layers.conv_specs("stem.conv", w, c.input_channels, 7, bias=False)
        specs += layers.norm_specs("stem.norm", w)
        specs += layers.conv_specs("down1.conv", 2 * w, w, 3, bias=False)
        specs += layers.norm_specs("down1.norm", 2 * w)
        specs += layers.conv_specs("down2.conv", 4 * w, 2 * w, 3, bias=False)
        specs += layers.norm_specs("down2.norm", 4 * w)
        for i in range(c.n_residual_blocks):
            for j in (1, 2):
                specs += layers.conv_specs(f"res{i}.conv{j}", 4 * w, 4 * w, 3, bias=False)
                specs += layers.norm_specs(f"res{i}.norm{j}", 4 * w)
        specs += layers.conv_transpose_specs("up1.conv", 4 * w, 2 * w, 4, bias=False)
        specs += layers.norm_specs("up1.norm", 2 * w)
        specs += layers.conv_transpose_specs("up2.conv", 2 * w, w, 4, bias=False)
        specs += layers.norm_specs("up2.norm", w)
        specs += layers.conv_specs("head.conv", c.out_channels, w, 7, bias=True)
        return specs

    def validate_input(self, image: Tensor) -> None:
        c = self.config
        if image.ndim != 4:
            raise ShapeError(f"generator expects [N,C,H,W], got {image.shape}")
        _, channels, h, w = image.shape
        if channels != c.input_channels:
            raise ShapeError(f"generator expects {c.input_channels} channels, got image {image.shape}")
        if h != c.image_size or w != c.image_size:
            raise ShapeError(
                f"image size {h}x{w} does not match generator image_size {c.image_size}"
            )

    def forward(self, params: Any, *inputs: Tensor, **options: Any) -> Tensor:
        (image,) = inputs
        self.validate_input(image)

        h = relu(layers.norm(params, "stem.norm", layers.conv(params, "stem.conv", image, padding=3)))
        h = relu(layers.norm(params, "down1.norm", layers.conv(params, "down1.conv", h, stride=2, padding=1)))
        h = relu(layers.norm(params, "down2.norm", layers.conv(params, "down2.conv", h, stride=2, padding=1)))
        for i in range(self.config.n_residual_blocks):
            r = relu(layers.norm(params, f"res{i}.norm1", layers.conv(params, f"res{i}.conv1", h, padding=1)))
            r = layers.norm(params, f"res{i}.norm2", layers.conv(params, f"res{i}.conv2", r, padding=1))
            h = h + r
        h = relu(layers.norm(params, "up1.norm", layers.conv_transpose(params, "up1.conv", h, stride=2, padding=1)))
        h = relu(layers.norm(params, "up2.norm", layers.conv_transpose(params, "up2.conv", h, stride=2, padding=1)))
        return tanh(layers.conv(params, "head.conv", h, padding=3))
