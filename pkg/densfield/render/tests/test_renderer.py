# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel, RaySamples, SamplerConfig, sample_ray_points, ray_through_pixel
from densfield.models import ConstantField
from densfield.render import RenderView, composite, render_patch, render_patches, render_rays, sample_colors
from densfield.synthetic import SceneGT, Box, gt_density, render_gt_image
from densfield.tensor import Graph, backward, finite_diff_grad, relative_error
from densfield.tensor import ops

CAMERA = CameraModel(32.0, 32.0, 47.5, 31.5, 96, 64)


def _uniform_samples(count, delta=1.0):
    depths = delta * np.arange(1.0, count + 1.0)
    return RaySamples(depths, np.full(count, delta), np.zeros((count, 3)))


def test_half_opaque_slab():
    result = composite(np.full(6, np.log(2.0)), _uniform_samples(6))
    expected = 0.5 ** np.arange(1.0, 7.0)
    assert np.allclose(result.weights.data, expected, rtol=1e-14, atol=0.0)
    assert abs(result.transmittance.item() - 0.5 ** 6) < 1e-15


def test_empty_ray():
    result = composite(np.zeros(5), _uniform_samples(5))
    assert result.depth.item() == 0.0
    assert result.transmittance.item() == 1.0
    assert result.filled_depth.item() == 5.0


def test_opaque_first_sample():
    result = composite(np.array([1e6, 0.0, 3.0]), _uniform_samples(3))
    assert result.depth.item() == 1.0
    assert result.weights.data.tolist() == [1.0, 0.0, 0.0]


def test_telescoping_identity():
    rng = np.random.default_rng(0)
    sigmas = rng.exponential(0.5, size=(1000, 64)) * (rng.uniform(size=(1000, 64)) < 0.7)
    depths = np.sort(rng.uniform(3.0, 23.0, size=(1000, 64)), axis=-1)
    deltas = np.concatenate([np.diff(depths, axis=-1), np.full((1000, 1), 0.3)], axis=-1)
    result = composite(sigmas, RaySamples(depths, deltas, np.zeros((1000, 64, 3))))
    totals = result.weights.data.sum(axis=-1) + result.transmittance.data
    assert np.max(np.abs(totals - 1.0)) < 1e-12


def test_more_density_never_lets_more_light_through():
    rng = np.random.default_rng(1)
    samples = _uniform_samples(16, 0.5)
    for _ in range(100):
        sigmas = rng.exponential(1.0, size=16)
        raised = sigmas.copy()
        raised[rng.integers(16)] += rng.exponential(1.0)
        assert composite(raised, samples).transmittance.item() <= composite(sigmas, samples).transmittance.item()
        weights = composite(sigmas, samples).weights.data
        assert np.all(np.diff(np.cumsum(weights)) >= 0.0)


def test_composite_gradients():
    rng = np.random.default_rng(2)
    depths = np.sort(rng.uniform(3.0, 23.0, size=(4, 8)), axis=-1)
    samples = RaySamples(depths, np.concatenate([np.diff(depths, axis=-1), np.ones((4, 1))], axis=-1),
                         np.zeros((4, 8, 3)))
    sigmas = rng.uniform(0.05, 1.0, size=(4, 8))
    colors = rng.uniform(size=(2, 4, 8, 3))
    color_weights = rng.normal(size=(2, 4, 3))

    def scalar(values):
        result = composite(values, samples, colors)
        return float(np.sum(result.colors.data * color_weights) + np.sum(result.filled_depth.data))

    with Graph() as graph:
        leaf = graph.leaf('sigma', sigmas)
        result = composite(leaf, samples, colors)
        loss = ops.reduce_sum(result.colors * color_weights) + ops.reduce_sum(result.filled_depth)
    grads = backward(graph, loss)
    assert relative_error(grads['sigma'].data, finite_diff_grad(scalar, sigmas)) < 1e-6


def test_slab_expected_depth():
    near, far, sigma = 3.0, 23.0, 0.4
    samples = sample_ray_points(ray_through_pixel(CAMERA, [47.5, 31.5]), SamplerConfig(256, near, far, 'linear'))
    result = composite(np.full(256, sigma), samples)
    analytic = (near + 1.0 / sigma) - (far + 1.0 / sigma) * np.exp(-sigma * (far - near))
    assert abs(result.depth.item() - analytic) / analytic < 1e-3


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_negative_density():
    composite(np.array([0.1, -0.1]), _uniform_samples(2))


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_mismatched_densities():
    composite(np.zeros(3), _uniform_samples(4))


def test_sample_colors_zero_outside():
    image = np.full((64, 96, 3), 0.25)
    colors, valid = sample_colors(image, CAMERA, [[0.0, 0.0, 5.0], [0.0, 0.0, -5.0], [500.0, 0.0, 5.0]])
    assert valid.tolist() == [True, False, False]
    assert colors.tolist() == [[0.25, 0.25, 0.25], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]


def test_sample_colors_interpolates():
    image = np.zeros((64, 96, 3))
    image[:, 48:] = 1.0
    camera = CameraModel(32.0, 32.0, 47.25, 31.5, 96, 64)
    colors, _ = sample_colors(image, camera, [[0.0, 0.0, 4.0]])
    assert np.allclose(colors, 0.25, atol=1e-12)


def test_zero_density_patch():
    field = ConstantField(lambda points: np.zeros(len(points)))
    views = [RenderView(np.ones((64, 96, 3)), CAMERA)]
    patch = render_patch(field, CAMERA, (4, 8), 8, views, SamplerConfig())
    assert patch.colors.shape == (1, 8, 8, 3)
    assert not np.any(patch.colors.data)
    assert not np.any(patch.depth.data)
    assert np.allclose(patch.filled_depth.data, 23.0)


def test_patch_shapes():
    field = ConstantField(lambda points: np.full(len(points), 0.1))
    views = [RenderView(np.ones((64, 96, 3)), CAMERA)] * 3
    rendered = render_patches(field, CAMERA, [(0, 0), (56, 88)], 8, views, SamplerConfig(8))
    assert rendered.colors.shape == (3, 2, 8, 8, 3)
    assert rendered.depth.shape == (2, 8, 8)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_patch_must_fit():
    field = ConstantField(lambda points: np.zeros(len(points)))
    render_patch(field, CAMERA, (60, 0), 8, [RenderView(np.ones((64, 96, 3)), CAMERA)], SamplerConfig())


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_patch_needs_render_view():
    render_patch(ConstantField(lambda points: np.zeros(len(points))), CAMERA, (0, 0), 8, [], SamplerConfig())


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_jitter_needs_rng():
    field = ConstantField(lambda points: np.zeros(len(points)))
    render_rays(field, np.zeros((1, 3)), [[0.0, 0.0, 1.0]], [], SamplerConfig(jitter=True))


def _two_tone_wall():
    left = Box((-25.0, 0.0, 10.5), (50.0, 100.0, 1.0), (0.9, 0.1, 0.1))
    right = Box((25.0, 0.0, 10.5), (50.0, 100.0, 1.0), (0.1, 0.3, 0.8))
    return SceneGT((left, right), (), 1e6, (0.0, 0.0, 0.0), 50.0, ((-50.0, -50.0, 10.0), (50.0, 50.0, 11.0)), 0)


def test_ground_truth_field_reproduces_reference_image():
    scene = _two_tone_wall()
    image = render_gt_image(scene, CAMERA)
    field = ConstantField(lambda points: gt_density(scene, points))
    patch = render_patch(field, CAMERA, (20, 44), 8, [RenderView(image, CAMERA)], SamplerConfig())
    expected = image[20:28, 44:52]
    assert np.max(np.abs(patch.colors.data[0] - expected)) < 2.0 / 255.0
    assert np.abs(expected[:, 0] - expected[:, -1]).max() > 0.5


def test_render_is_deterministic():
    rng_a, rng_b = np.random.default_rng(5), np.random.default_rng(5)
    field = ConstantField(lambda points: np.abs(np.sin(points).sum(axis=-1)))
    views = [RenderView(np.random.default_rng(0).uniform(size=(64, 96, 3)), CAMERA)]
    first = render_patch(field, CAMERA, (3, 3), 4, views, SamplerConfig(jitter=True), rng_a)
    second = render_patch(field, CAMERA, (3, 3), 4, views, SamplerConfig(jitter=True), rng_b)
    assert np.array_equal(first.colors.data, second.colors.data)
