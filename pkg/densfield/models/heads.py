"""Positional encoding and the single-view and multi-view density heads"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, FEATURE_CHANNELS, PE_DIM, PE_FREQUENCIES, HEAD_INPUT_DIM, \
    HEAD_SIZES, SV_HIDDEN, SV_HEAD_PREFIX, MV_HEAD_PREFIX
from densfield.core.exceptions import DensFieldContractViolation, DensFieldInvisiblePoint
from densfield.models.layers import BoundParams, add_residual_mlp, residual_mlp
from densfield.tensor import ParamSet, Tensor, as_tensor
from densfield.tensor import ops

MLP1_PREFIX = MV_HEAD_PREFIX + 'mlp1'
MLP2_PREFIX = MV_HEAD_PREFIX + 'mlp2'


def head_dimensions(head_size: str) -> typing.Tuple[int, int, int]:
    """(MLP_1 hidden, view feature size, MLP_2 hidden) of a head size"""
    try:
        return HEAD_SIZES[head_size]
    except KeyError as err:
        raise DensFieldContractViolation("head size must be one of {}, got '{}'".format(
            sorted(HEAD_SIZES), head_size)) from err


def init_heads(params: ParamSet, rng: np.random.Generator, head_size: str = 'middle') -> None:
    """Register the single-view head and the multi-view MLPs"""
    mlp1_hidden, view_features, mlp2_hidden = head_dimensions(head_size)
    add_residual_mlp(params, SV_HEAD_PREFIX + 'mlp', HEAD_INPUT_DIM, SV_HIDDEN, 1, rng)
    add_residual_mlp(params, MLP1_PREFIX, HEAD_INPUT_DIM, mlp1_hidden, 1 + view_features, rng)
    if mlp2_hidden:
        add_residual_mlp(params, MLP2_PREFIX, view_features, mlp2_hidden, 1, rng)


def normalize_depth(depths, z_near: float, z_far: float) -> np.ndarray:
    """Inverse depth mapped so z_near -> 1 and z_far -> 0

    >>> normalize_depth([3.0, 23.0], 3.0, 23.0).tolist()
    [1.0, 0.0]
    """
    depths = np.asarray(depths, dtype=FLOAT_DTYPE)
    return (1.0 / depths - 1.0 / z_far) / (1.0 / z_near - 1.0 / z_far)


def normalize_pixels(pixels, width: int, height: int) -> np.ndarray:
    """Pixel coordinates mapped to [-1, 1] over the image"""
    pixels = np.asarray(pixels, dtype=FLOAT_DTYPE)
    return 2.0 * pixels / np.array([width - 1, height - 1], dtype=FLOAT_DTYPE) - 1.0


def positional_encoding(values) -> np.ndarray:
    """Encode normalized (d, u_x, u_y) triples

    Args:
        values: (..., 3)

    Returns:
        (..., 39): the raw values, then for each input and each band l the pair sin(2^l pi x), cos(2^l pi x)

    >>> encoding = positional_encoding([0.0, 0.0, 0.0])
    >>> len(encoding), encoding[3:5].tolist()
    (39, [0.0, 1.0])
    """
    values = np.asarray(values, dtype=FLOAT_DTYPE)
    if values.shape[-1] != 3:
        raise DensFieldContractViolation("positional encoding expects (..., 3), got {}".format(values.shape))
    scaled = values[..., :, None] * (np.pi * 2.0 ** np.arange(PE_FREQUENCIES))
    bands = np.stack([np.sin(scaled), np.cos(scaled)], axis=-1)
    return np.concatenate([values, bands.reshape(values.shape[:-1] + (PE_DIM - 3,))], axis=-1)


def _head_input(features, encodings) -> Tensor:
    features = as_tensor(features)
    encodings = as_tensor(encodings)
    if features.shape[-1] != FEATURE_CHANNELS or encodings.shape[-1] != PE_DIM \
            or features.shape[:-1] != encodings.shape[:-1]:
        raise DensFieldContractViolation("heads expect ({0}) features and ({1}) encodings, got {2} and {3}".format(
            FEATURE_CHANNELS, PE_DIM, features.shape, encodings.shape))
    return ops.concat([features, encodings], axis=-1)


def density_sv(features, encodings, params: BoundParams) -> Tensor:
    """Single-view density softplus(phi_SV(f, gamma))

    Args:
        features: (64,) or (N, 64)
        encodings: (39,) or (N, 39)
        params: bound parameters containing heads.sv

    Returns:
        densities, a scalar or (N,)
    """
    inputs = _head_input(features, encodings)
    single = inputs.ndim == 1
    if single:
        inputs = ops.reshape(inputs, (1, HEAD_INPUT_DIM))
    sigma = ops.reshape(ops.softplus(residual_mlp(params, SV_HEAD_PREFIX + 'mlp', inputs)), (inputs.shape[0],))
    return ops.reshape(sigma, ()) if single else sigma


def masked_softmax(logits, mask) -> Tensor:
    """Confidence weights over the views, exactly zero where the mask is off

    Raises:
        DensFieldInvisiblePoint: when a row has no view set

    >>> masked_softmax([0.0, 0.0], [1, 1]).data.tolist()
    [0.5, 0.5]
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.size == 0 or not np.all(mask.any(axis=-1)):
        raise DensFieldInvisiblePoint("point is invisible to all density views")
    return ops.masked_softmax(logits, mask)


def density_mv(features, encodings, mask, params: BoundParams,
               head_size: str = 'middle') -> typing.Tuple[Tensor, Tensor]:
    """Multi-view density: per-view tokens from MLP_1, confidence weighted pooling, MLP_2 decoding

    Points whose mask is all zero come out with density 0 and all-zero weights.

    Args:
        features: (K, 64) or (N, K, 64)
        encodings: (K, 39) or (N, K, 39)
        mask: (K,) or (N, K) frustum bits
        params: bound parameters containing heads.mv
        head_size: key of HEAD_SIZES the parameters were built for

    Returns:
        densities (scalar or (N,)) and the view weights ((K,) or (N, K))
    """
    _, view_features, mlp2_hidden = head_dimensions(head_size)
    inputs = _head_input(features, encodings)
    mask = np.asarray(mask, dtype=bool)
    single = inputs.ndim == 2
    if single:
        inputs = ops.reshape(inputs, (1,) + inputs.shape)
        mask = mask.reshape(1, -1)
    n_points, n_views, _ = inputs.shape
    if mask.shape != (n_points, n_views):
        raise DensFieldContractViolation("mask shape {} does not match {} points in {} views".format(
            mask.shape, n_points, n_views))
    tokens = residual_mlp(params, MLP1_PREFIX, ops.reshape(inputs, (n_points * n_views, HEAD_INPUT_DIM)))
    tokens = ops.reshape(tokens, (n_points, n_views, 1 + view_features))
    weights = ops.masked_softmax(tokens[:, :, 0], mask)
    pooled = ops.reduce_sum(ops.reshape(weights, (n_points, n_views, 1)) * tokens[:, :, 1:], axis=1)
    if mlp2_hidden:
        logits = ops.reshape(residual_mlp(params, MLP2_PREFIX, pooled), (n_points,))
    else:
        logits = ops.reshape(pooled, (n_points,))
    sigma = ops.softplus(logits) * mask.any(axis=1).astype(FLOAT_DTYPE)
    if single:
        return ops.reshape(sigma, ()), ops.reshape(weights, (n_views,))
    return sigma, weights
