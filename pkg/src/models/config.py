from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.constants import Constants

Precision = Literal["float32", "float64"]


class StrictModel(BaseModel):
    """Base for every config: unknown keys are rejected, values re-validated on assignment."""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class GeneratorConfig(StrictModel):
    kind: Literal["resnet_generator"] = "resnet_generator"
    input_channels: int = Field(3, ge=1)
    output_channels: Optional[int] = Field(None, ge=1)
    base_width: int = Field(64, ge=1)
    n_residual_blocks: int = Field(6, ge=0)
    image_size: int = Field(64, ge=4)
    precision: Precision = "float32"

    @field_validator("image_size")
    @classmethod
    def _divisible_by_four(cls, value: int) -> int:
        if value % 4:
            raise ValueError(f"image_size must be divisible by 4, got {value}")
        return value

    @property
    def out_channels(self) -> int:
        return self.output_channels or self.input_channels


class DiscriminatorConfig(StrictModel):
    kind: Literal["patch_discriminator"] = "patch_discriminator"
    input_channels: int = Field(3, ge=1)
    base_width: int = Field(64, ge=1)
    n_layers: int = Field(3, ge=0)
    padding: int = Field(1, ge=0)
    image_size: int = Field(64, ge=1)
    precision: Precision = "float32"

    @property
    def layer_specs(self) -> Tuple[Tuple[int, int, int, int], ...]:
        """(in_channels, out_channels, kernel, stride) per convolution."""
        specs = []
        in_ch = self.input_channels
        for i in range(self.n_layers):
            out_ch = self.base_width * min(2**i, 8)
            specs.append((in_ch, out_ch, 4, 2))
            in_ch = out_ch
        out_ch = self.base_width * min(2**self.n_layers, 8)
        specs.append((in_ch, out_ch, 4, 1))
        specs.append((out_ch, 1, 4, 1))
        return tuple(specs)

    @property
    def receptive_field(self) -> int:
        field, jump = 1, 1
        for _, _, kernel, stride in self.layer_specs:
            field += (kernel - 1) * jump
            jump *= stride
        return field

    @classmethod
    def fitting(cls, image_size: int, max_layers: int = 3, **kwargs) -> "DiscriminatorConfig":
        """Deepest PatchGAN (up to ``max_layers``) whose receptive field fits the image."""
        for n_layers in range(max_layers, -1, -1):
            candidate = cls(image_size=image_size, n_layers=n_layers, **kwargs)
            if candidate.receptive_field <= image_size:
                return candidate
        raise ValueError(f"no PatchGAN receptive field fits image_size {image_size}")


class UNetConfig(StrictModel):
    kind: Literal["unet"] = "unet"
    input_channels: int = Field(6, ge=1)
    output_channels: int = Field(3, ge=1)
    base_width: int = Field(64, ge=1)
    image_size: int = Field(64, ge=4)
    depth: Optional[int] = Field(None, ge=1)
    final_activation: Literal["tanh", "none"] = "tanh"
    precision: Precision = "float32"

    @model_validator(mode="after")
    def _check_depth(self) -> "UNetConfig":
        depth = self.resolved_depth
        if self.image_size % (2**depth) or self.image_size // (2**depth) < 2:
            raise ValueError(
                f"U-Net depth {depth} leaves no >=2x2 bottleneck for image_size {self.image_size}"
            )
        return self

    @property
    def resolved_depth(self) -> int:
        if self.depth is not None:
            return self.depth
        depth = 0
        size = self.image_size
        while size % 2 == 0 and size // 2 >= 2:
            size //= 2
            depth += 1
        return max(depth, 1)

    def width_at(self, level: int) -> int:
        return self.base_width * min(2**level, 8)


class LossWeights(StrictModel):
    lambda_rx: float = Field(10.0, ge=0, allow_inf_nan=False)
    lambda_ry: float = Field(10.0, ge=0, allow_inf_nan=False)
    lambda_tau_x: float = Field(10.0, ge=0, allow_inf_nan=False)
    lambda_tau_y: float = Field(10.0, ge=0, allow_inf_nan=False)
    lambda_cycle_x: float = Field(10.0, ge=0, allow_inf_nan=False)
    lambda_cycle_y: float = Field(10.0, ge=0, allow_inf_nan=False)
    adversarial: float = Field(1.0, ge=0, allow_inf_nan=False)

    def swapped(self) -> "LossWeights":
        """Weights seen from the other domain."""
        return LossWeights(
            lambda_rx=self.lambda_ry,
            lambda_ry=self.lambda_rx,
            lambda_tau_x=self.lambda_tau_y,
            lambda_tau_y=self.lambda_tau_x,
            lambda_cycle_x=self.lambda_cycle_y,
            lambda_cycle_y=self.lambda_cycle_x,
            adversarial=self.adversarial,
        )


class SyntheticSceneConfig(StrictModel):
    image_size: int = Field(64, ge=8)
    n_classes: int = Field(Constants.N_CLASSES, ge=Constants.N_CLASSES, le=Constants.N_CLASSES)
    frames: int = Field(500, ge=3)
    smoothness: float = Field(0.9, ge=0.0, lt=1.0)
    max_speed: float = Field(1.5, gt=0.0)
    object_radius: Optional[int] = Field(None, ge=1)
    shadow_offset: int = Field(2, ge=1)
    texture_seed: int = 0
    permutation: Tuple[int, int, int] = (2, 0, 1)
    mirror: bool = True
    shape_swap: bool = True
    condition: Literal["day", "sunset", "rain", "snow", "night"] = "day"
    task: Literal["image2image", "image2labels"] = "image2image"
    coherence_bound: float = Field(0.1, gt=0.0)

    @field_validator("image_size")
    @classmethod
    def _divisible_by_four(cls, value: int) -> int:
        if value % 4:
            raise ValueError(f"image_size must be divisible by 4, got {value}")
        return value

    @field_validator("permutation")
    @classmethod
    def _is_permutation(cls, value: Tuple[int, int, int]) -> Tuple[int, int, int]:
        if sorted(value) != [0, 1, 2]:
            raise ValueError(f"permutation must reorder (0, 1, 2), got {value}")
        return value

    @model_validator(mode="after")
    def _object_fits(self) -> "SyntheticSceneConfig":
        margin = 2 * (self.radius + self.shadow_offset) + 2
        if margin >= self.image_size:
            raise ValueError(
                f"object radius {self.radius} with shadow offset {self.shadow_offset} "
                f"does not fit image_size {self.image_size}"
            )
        return self

    @property
    def radius(self) -> int:
        return self.object_radius or max(self.image_size // 8, 2)


LossMode = Literal["cycle", "recycle", "combined"]


class TrainConfig(StrictModel):
    steps: int = Field(2000, ge=0)
    batch_size: int = Field(1, ge=1)
    lr: float = Field(2e-4, gt=0, allow_inf_nan=False)
    beta1: float = Field(0.5, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    weights: LossWeights = Field(default_factory=LossWeights)
    loss_mode: LossMode = "recycle"
    adversarial_mode: Literal["least_squares", "log"] = "least_squares"
    reconstruction_norm: Literal["l2", "l1"] = "l2"
    seed: int = 0
    pool_size: int = Field(50, ge=0)
    checkpoint_interval: int = Field(500, ge=0)
    decay_start: Optional[int] = Field(None, ge=0)
    log_interval: int = Field(50, ge=1)
    image_size: int = Field(32, ge=4)
    channels: int = Field(3, ge=1)
    generator_width: int = Field(64, ge=1)
    n_residual_blocks: int = Field(6, ge=0)
    discriminator_width: int = Field(64, ge=1)
    discriminator_layers: Optional[int] = Field(None, ge=0)
    predictor_width: int = Field(64, ge=1)
    precision: Precision = "float32"

    @model_validator(mode="after")
    def _check_pool(self) -> "TrainConfig":
        if self.pool_size and self.pool_size < self.batch_size:
            raise ValueError(
                f"pool_size must be 0 or >= batch_size ({self.batch_size}), got {self.pool_size}"
            )
        if self.image_size % 4:
            raise ValueError(f"image_size must be divisible by 4, got {self.image_size}")
        return self

    @property
    def include_cycle(self) -> bool:
        return self.loss_mode in ("cycle", "combined")

    @property
    def include_recycle(self) -> bool:
        return self.loss_mode in ("recycle", "combined")

    @property
    def resolved_decay_start(self) -> int:
        return self.steps // 2 if self.decay_start is None else self.decay_start

    def pinned(self) -> "TrainConfig":
        """The same config with a default decay start resolved to its step number."""
        if self.decay_start is not None:
            return self
        return self.model_copy(update={"decay_start": self.resolved_decay_start})

    def generator_config(self) -> GeneratorConfig:
        return GeneratorConfig(
            input_channels=self.channels,
            base_width=self.generator_width,
            n_residual_blocks=self.n_residual_blocks,
            image_size=self.image_size,
            precision=self.precision,
        )

    def discriminator_config(self) -> DiscriminatorConfig:
        common = dict(input_channels=self.channels, base_width=self.discriminator_width, precision=self.precision)
        if self.discriminator_layers is not None:
            return DiscriminatorConfig(image_size=self.image_size, n_layers=self.discriminator_layers, **common)
        return DiscriminatorConfig.fitting(self.image_size, **common)

    def predictor_config(self) -> UNetConfig:
        return UNetConfig(
            input_channels=2 * self.channels,
            output_channels=self.channels,
            base_width=self.predictor_width,
            image_size=self.image_size,
            precision=self.precision,
        )


class SegmenterConfig(StrictModel):
    """Training setup of the oracle segmenter that scores generated images."""

    base_width: int = Field(16, ge=1)
    steps: int = Field(400, ge=1)
    batch_size: int = Field(4, ge=1)
    lr: float = Field(1e-3, gt=0, allow_inf_nan=False)
    seed: int = 0
    qualification_iou: float = Field(0.9, ge=0.0, le=1.0)
    precision: Precision = "float32"

    def network_config(self, image_size: int, channels: int = 3, n_classes: int = Constants.N_CLASSES) -> UNetConfig:
        return UNetConfig(
            input_channels=channels,
            output_channels=n_classes,
            base_width=self.base_width,
            image_size=image_size,
            final_activation="none",
            precision=self.precision,
        )
