# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.models import build_params, encode, sample_feature, sample_features
from densfield.tensor import Graph, backward, Tensor, finite_diff_grad, relative_error
from densfield.tensor import ops


@pytest.fixture(scope='module')
def params():
    return build_params(seed=11)


def test_feature_map_shape(params):
    image = np.random.default_rng(0).uniform(size=(16, 24, 3))
    assert encode(image, params.bind()).shape == (64, 16, 24)


def test_zero_weights_give_bias_fields(params):
    zeroed = params.copy()
    for name, value in params.items():
        if name.startswith('backbone.'):
            zeroed.set(name, np.zeros_like(value))
    zeroed.set('backbone.out.b', np.arange(64.0))
    features = encode(np.random.default_rng(1).uniform(size=(8, 8, 3)), zeroed.bind()).data
    assert np.array_equal(features, np.broadcast_to(np.arange(64.0)[:, None, None], (64, 8, 8)))


def test_deterministic(params):
    image = np.random.default_rng(2).uniform(size=(8, 12, 3))
    assert encode(image, params.bind()).data.tobytes() == encode(image.copy(), params.bind()).data.tobytes()


def test_gradients_match_finite_differences(params):
    rng = np.random.default_rng(3)
    image = rng.uniform(size=(8, 8, 3))
    weights = rng.normal(size=(64, 8, 8))
    names = ['backbone.enc1.w', 'backbone.enc1.b', 'backbone.enc2.b', 'backbone.enc3.b', 'backbone.dec2.b',
             'backbone.dec1.b', 'backbone.out.b']
    toy = params.copy()
    toy.freeze()
    for name in names:
        toy.unfreeze(name)

    with Graph() as graph:
        loss = ops.reduce_sum(encode(image, toy.bind(graph)) * weights)
    grads = backward(graph, loss)

    for name in names:
        def scalar(value, name=name):
            candidate = toy.copy()
            candidate.set(name, value)
            return float(np.sum(encode(image, candidate.bind()).data * weights))
        assert relative_error(grads[name].data, finite_diff_grad(scalar, toy[name])) < 1e-5, name


def test_integer_pixel_is_exact():
    feature_map = Tensor(np.random.default_rng(4).normal(size=(64, 6, 7)))
    assert np.array_equal(sample_feature(feature_map, [3.0, 2.0]).data, feature_map.data[:, 2, 3])


def test_midpoint_is_mean():
    feature_map = Tensor(np.random.default_rng(5).normal(size=(64, 6, 7)))
    expected = (feature_map.data[:, 1, 2] + feature_map.data[:, 1, 3]) / 2.0
    assert np.allclose(sample_feature(feature_map, [2.5, 1.0]).data, expected, atol=1e-15)


def test_subpixel_matches_four_term_oracle():
    rng = np.random.default_rng(6)
    grid = rng.normal(size=(64, 6, 7))
    for _ in range(100):
        u, v = rng.uniform(0.0, 6.0), rng.uniform(0.0, 5.0)
        x0, y0 = min(int(u), 5), min(int(v), 4)
        a, b = u - x0, v - y0
        oracle = ((1 - a) * (1 - b) * grid[:, y0, x0] + a * (1 - b) * grid[:, y0, x0 + 1]
                  + (1 - a) * b * grid[:, y0 + 1, x0] + a * b * grid[:, y0 + 1, x0 + 1])
        assert np.max(np.abs(sample_feature(Tensor(grid), [u, v]).data - oracle)) < 1e-12


def test_sampling_is_linear_in_the_map():
    rng = np.random.default_rng(7)
    first, second = rng.normal(size=(2, 64, 6, 7))
    pixels = rng.uniform(size=(20, 2)) * [6.0, 5.0]
    combined = sample_features(Tensor(2.0 * first - 3.0 * second), pixels).data
    separate = 2.0 * sample_features(Tensor(first), pixels).data - 3.0 * sample_features(Tensor(second), pixels).data
    assert np.max(np.abs(combined - separate)) < 1e-12


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_extent_not_divisible_by_four(params):
    encode(np.zeros((10, 8, 3)), params.bind())


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_sample_outside_map():
    sample_feature(Tensor(np.zeros((64, 6, 7))), [-0.5, 1.0])
