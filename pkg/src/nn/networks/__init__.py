from src.nn.networks.patch_discriminator import PatchDiscriminator
from src.nn.networks.resnet_generator import ResnetGenerator
from src.nn.networks.unet import UNet

__all__ = [
    "ResnetGenerator",
    "PatchDiscriminator",
    "UNet",
]
