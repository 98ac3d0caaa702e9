"""Recycle-GAN desk

Unpaired video retargeting at desk scale: generators, discriminators and
temporal predictors trained with recycle, recurrent and cycle losses on a small
numpy autograd.
"""

__version__ = "1.0.0"
__author__ = "recycle-gan-desk developers"
