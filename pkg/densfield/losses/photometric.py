"""Self supervised reconstruction losses on rendered patches"""
import typing
from dataclasses import dataclass

import numpy as np

from densfield.core.exceptions import DensFieldContractViolation
from densfield.tensor import Tensor, as_tensor
from densfield.tensor import ops


@dataclass(frozen=True)
class LossConfig:
    lambda_l1: float = 0.15
    lambda_ssim: float = 0.85
    lambda_eas: float = 1e-3
    ssim_c1: float = 0.01 ** 2
    ssim_c2: float = 0.03 ** 2

    def __post_init__(self):
        for name in ('lambda_l1', 'lambda_ssim', 'lambda_eas', 'ssim_c1', 'ssim_c2'):
            if getattr(self, name) < 0.0:
                raise DensFieldContractViolation("{} must be non negative, got {}".format(name, getattr(self, name)))

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'LossConfig':
        return cls(settings['lambda_l1'], settings['lambda_ssim'], settings['lambda_eas'], settings['ssim_c1'],
                   settings['ssim_c2'])


class PatchBatch(typing.NamedTuple):
    """Loss view patches and what the renderer made of them"""
    targets: np.ndarray  # (n, P, P, 3) colors of the loss view
    reconstructions: Tensor  # (K, n, P, P, 3), one per render view
    depth: Tensor  # (n, P, P) positive rendered depth


def box_mean(x: Tensor) -> Tensor:
    """3x3 mean over the two trailing axes with reflection at the borders"""
    height, width = x.shape[-2:]
    padded = ops.pad_reflect(x, 1)
    total = None
    for row in range(3):
        for col in range(3):
            window = padded[..., row:row + height, col:col + width]
            total = window if total is None else total + window
    return total / 9.0


def _channels_first(x: Tensor) -> Tensor:
    lead = tuple(range(x.ndim - 3))
    return ops.transpose(x, lead + (x.ndim - 1, x.ndim - 3, x.ndim - 2))


def ssim_map(first, second, config: LossConfig = LossConfig()) -> Tensor:
    """Per pixel structural similarity of two (..., H, W, C) images, averaged over channels

    Args:
        first: image or patches, values in [0, 1]
        second: same shape as first
        config: supplies the stabilising constants C1 and C2

    Returns:
        (..., H, W) similarity in [-1, 1]

    >>> value = ssim_map(np.zeros((3, 3, 3)), np.ones((3, 3, 3))).data[0, 0]
    >>> abs(value - 0.01 ** 2 / (1.0 + 0.01 ** 2)) < 1e-15
    True
    """
    first, second = as_tensor(first), as_tensor(second)
    if first.shape != second.shape or first.ndim < 3:
        raise DensFieldContractViolation("ssim needs two (..., H, W, C) images of equal shape, got {} and {}".format(
            first.shape, second.shape))
    first, second = _channels_first(first), _channels_first(second)
    mean_first, mean_second = box_mean(first), box_mean(second)
    var_first = box_mean(first * first) - mean_first * mean_first
    var_second = box_mean(second * second) - mean_second * mean_second
    covariance = box_mean(first * second) - mean_first * mean_second
    numerator = (2.0 * mean_first * mean_second + config.ssim_c1) * (2.0 * covariance + config.ssim_c2)
    denominator = ((mean_first * mean_first + mean_second * mean_second + config.ssim_c1)
                   * (var_first + var_second + config.ssim_c2))
    return ops.reduce_mean(numerator / denominator, axis=-3)


def reconstruction_costs(batch: PatchBatch, config: LossConfig = LossConfig()) -> Tensor:
    """(K, n, P, P) combined L1 and SSIM cost of every reconstruction at every pixel"""
    reconstructions = as_tensor(batch.reconstructions)
    targets = np.asarray(batch.targets, dtype=np.float64)
    if reconstructions.ndim < 1 or reconstructions.shape[0] == 0:
        raise DensFieldContractViolation("photometric loss needs at least one render view")
    if reconstructions.shape[1:] != targets.shape:
        raise DensFieldContractViolation("reconstructions {} do not match targets {}".format(
            reconstructions.shape, targets.shape))
    l1 = ops.reduce_mean(ops.absolute(reconstructions - targets), axis=-1)
    similarity = ssim_map(reconstructions, np.broadcast_to(targets, reconstructions.shape), config)
    return config.lambda_l1 * l1 + config.lambda_ssim * (1.0 - similarity) / 2.0


def photometric_loss(batch: PatchBatch, config: LossConfig = LossConfig()) -> Tensor:
    """Mean over pixels of the cheapest reconstruction at that pixel"""
    return ops.reduce_mean(ops.reduce_min(reconstruction_costs(batch, config), axis=0))


def _image_gradient_weights(images: np.ndarray, axis: int) -> np.ndarray:
    differences = np.abs(np.diff(images, axis=axis))
    return np.exp(-differences.mean(axis=-1))


def edge_aware_smoothness(depth, images, config: LossConfig = LossConfig()) -> Tensor:
    """Smoothness of the mean normalised disparity, relaxed across image edges

    Args:
        depth: (n, P, P) positive depth patches
        images: (n, P, P, 3) the matching loss view patches
        config: unused, kept for a uniform loss signature

    Returns:
        scalar, mean over x and y forward differences; an axis of extent 1 contributes nothing

    >>> round(edge_aware_smoothness(np.array([[[1.0, 0.5]]]), np.zeros((1, 1, 2, 3))).item(), 6)
    0.666667
    """
    del config
    depth = as_tensor(depth)
    images = np.asarray(images, dtype=np.float64)
    if np.any(depth.data <= 0.0):
        raise DensFieldContractViolation("smoothness needs positive depth, found {}".format(depth.data.min()))
    if images.shape[:-1] != depth.shape:
        raise DensFieldContractViolation("images {} do not match depth {}".format(images.shape, depth.shape))
    disparity = 1.0 / depth
    normalised = disparity / ops.reduce_mean(disparity, axis=(-2, -1), keepdims=True)
    loss = Tensor(0.0)
    if depth.shape[-1] > 1:
        step_x = normalised[..., :, 1:] - normalised[..., :, :-1]
        loss = loss + ops.reduce_mean(ops.absolute(step_x) * _image_gradient_weights(images, -2))
    if depth.shape[-2] > 1:
        step_y = normalised[..., 1:, :] - normalised[..., :-1, :]
        loss = loss + ops.reduce_mean(ops.absolute(step_y) * _image_gradient_weights(images, -3))
    return loss


def total_loss(batch: PatchBatch, config: LossConfig = LossConfig()) -> Tensor:
    """Photometric loss plus lambda_eas times the edge aware smoothness of the rendered depth"""
    loss = photometric_loss(batch, config)
    if config.lambda_eas == 0.0:
        return loss
    return loss + config.lambda_eas * edge_aware_smoothness(batch.depth, batch.targets)
