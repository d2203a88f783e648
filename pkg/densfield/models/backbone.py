"""Convolutional encoder-decoder producing pixel aligned feature maps

enc1 (stride 1, 16 ch), enc2 (stride 2, 32 ch), enc3 (stride 2, 64 ch); two nearest upsample + conv blocks with skip
connections back to full resolution; a 1x1 convolution to FEATURE_CHANNELS.
"""
import typing

import numpy as np

from densfield.core.constants import BACKBONE_PREFIX, FEATURE_CHANNELS
from densfield.core.exceptions import DensFieldContractViolation
from densfield.models.layers import BoundParams, add_conv
from densfield.tensor import ParamSet, Tensor, as_tensor
from densfield.tensor import ops

# name: (input channels, output channels, kernel)
BACKBONE_LAYERS = (
    ('enc1', 3, 16, 3),
    ('enc2', 16, 32, 3),
    ('enc3', 32, 64, 3),
    ('dec2', 64 + 32, 32, 3),
    ('dec1', 32 + 16, 32, 3),
    ('out', 32, FEATURE_CHANNELS, 1),
)  # type: typing.Tuple[typing.Tuple[str, int, int, int], ...]


def init_backbone(params: ParamSet, rng: np.random.Generator) -> None:
    """Register the backbone weights, He initialised"""
    for name, in_channels, out_channels, kernel in BACKBONE_LAYERS:
        add_conv(params, BACKBONE_PREFIX + name, in_channels, out_channels, kernel, rng)


def _conv(params: BoundParams, name: str, x: Tensor, stride: int = 1) -> Tensor:
    weight = params[BACKBONE_PREFIX + name + '.w']
    kernel = weight.shape[-1]
    return ops.conv2d(x, weight, params[BACKBONE_PREFIX + name + '.b'], stride=stride, padding=kernel // 2)


def encode(image, params: BoundParams) -> Tensor:
    """Feature map (64, H, W) of an (H, W, 3) image with values in [0, 1]

    Args:
        image: array or tensor, H and W divisible by 4
        params: bound parameters containing the backbone entries

    Returns:
        pixel aligned feature map
    """
    image = as_tensor(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DensFieldContractViolation("encode expects an (H, W, 3) image, got {}".format(image.shape))
    height, width, _ = image.shape
    if height % 4 or width % 4:
        raise DensFieldContractViolation("image extents must be divisible by 4, got {}x{}".format(height, width))
    x = ops.transpose(image, (2, 0, 1))
    enc1 = ops.relu(_conv(params, 'enc1', x))
    enc2 = ops.relu(_conv(params, 'enc2', enc1, stride=2))
    enc3 = ops.relu(_conv(params, 'enc3', enc2, stride=2))
    dec2 = ops.relu(_conv(params, 'dec2', ops.concat([ops.upsample_nearest(enc3), enc2], axis=0)))
    dec1 = ops.relu(_conv(params, 'dec1', ops.concat([ops.upsample_nearest(dec2), enc1], axis=0)))
    return _conv(params, 'out', dec1)


def sample_features(feature_map: Tensor, pixels) -> Tensor:
    """(N, C) bilinear lookups at N continuous pixels, differentiable with respect to the map only"""
    return ops.bilinear_sample(feature_map, pixels)


def sample_feature(feature_map: Tensor, pixel) -> Tensor:
    """The feature vector at one continuous pixel, the pixel must lie inside the map"""
    return ops.reshape(sample_features(feature_map, np.reshape(pixel, (1, 2))), (feature_map.shape[0],))
