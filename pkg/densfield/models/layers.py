"""Parameter initialisation and the dense building blocks shared by the backbone and the heads"""
import typing

import numpy as np

from densfield.tensor import ParamSet, Tensor
from densfield.tensor import ops

BoundParams = typing.Mapping[str, Tensor]


def he_normal(rng: np.random.Generator, shape: typing.Tuple[int, ...], fan_in: int) -> np.ndarray:
    return rng.normal(scale=np.sqrt(2.0 / fan_in), size=shape)


def add_linear(params: ParamSet, prefix: str, in_dim: int, out_dim: int, rng: np.random.Generator) -> None:
    """Weights (in, out) under prefix.w and zero bias under prefix.b"""
    params.add(prefix + '.w', he_normal(rng, (in_dim, out_dim), in_dim))
    params.add(prefix + '.b', np.zeros(out_dim))


def add_conv(params: ParamSet, prefix: str, in_channels: int, out_channels: int, kernel: int,
             rng: np.random.Generator) -> None:
    params.add(prefix + '.w', he_normal(rng, (out_channels, in_channels, kernel, kernel),
                                        in_channels * kernel * kernel))
    params.add(prefix + '.b', np.zeros(out_channels))


def linear(params: BoundParams, prefix: str, x: Tensor) -> Tensor:
    return x @ params[prefix + '.w'] + params[prefix + '.b']


def add_residual_mlp(params: ParamSet, prefix: str, in_dim: int, hidden: int, out_dim: int,
                     rng: np.random.Generator) -> None:
    add_linear(params, prefix + '.fc_in', in_dim, hidden, rng)
    add_linear(params, prefix + '.fc_hidden', hidden, hidden, rng)
    add_linear(params, prefix + '.fc_out', hidden, out_dim, rng)


def residual_mlp(params: BoundParams, prefix: str, x: Tensor) -> Tensor:
    """fc_in, relu, one post-activation residual block, fc_out

    x is (N, in_dim), the result (N, out_dim) is not activated.
    """
    hidden = ops.relu(linear(params, prefix + '.fc_in', x))
    hidden = ops.relu(hidden + linear(params, prefix + '.fc_hidden', hidden))
    return linear(params, prefix + '.fc_out', hidden)
