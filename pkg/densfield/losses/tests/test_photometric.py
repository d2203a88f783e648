# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation
from densfield.losses import LossConfig, PatchBatch, ssim_map, photometric_loss, edge_aware_smoothness, total_loss
from densfield.losses.photometric import reconstruction_costs
from densfield.tensor import Graph, backward, finite_diff_grad, relative_error


def _patches(rng, count=2, size=8):
    return rng.uniform(size=(count, size, size, 3))


def test_self_similarity():
    rng = np.random.default_rng(0)
    patches = _patches(rng)
    assert np.array_equal(ssim_map(patches, patches).data, np.ones((2, 8, 8)))


def test_constant_patches_formula():
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    similarity = ssim_map(np.zeros((8, 8, 3)), np.ones((8, 8, 3))).data
    assert np.allclose(similarity, c1 * c2 / ((1.0 + c1) * c2), rtol=1e-12, atol=0.0)


def test_ssim_symmetric():
    rng = np.random.default_rng(1)
    first, second = _patches(rng), _patches(rng)
    assert np.max(np.abs(ssim_map(first, second).data - ssim_map(second, first).data)) < 1e-12


def test_ssim_range():
    rng = np.random.default_rng(2)
    similarity = ssim_map(_patches(rng, 4), _patches(rng, 4)).data
    assert similarity.min() >= -1.0 and similarity.max() <= 1.0


def test_ssim_matches_direct_window():
    rng = np.random.default_rng(3)
    first, second = rng.uniform(size=(5, 6, 3)), rng.uniform(size=(5, 6, 3))
    padded_first = np.pad(first, ((1, 1), (1, 1), (0, 0)), mode='reflect')
    padded_second = np.pad(second, ((1, 1), (1, 1), (0, 0)), mode='reflect')
    row, col = 0, 3
    window_first = padded_first[row:row + 3, col:col + 3].reshape(9, 3)
    window_second = padded_second[row:row + 3, col:col + 3].reshape(9, 3)
    mean_first, mean_second = window_first.mean(axis=0), window_second.mean(axis=0)
    var_first = window_first.var(axis=0)
    var_second = window_second.var(axis=0)
    covariance = ((window_first - mean_first) * (window_second - mean_second)).mean(axis=0)
    c1, c2 = 0.01 ** 2, 0.03 ** 2
    expected = np.mean((2 * mean_first * mean_second + c1) * (2 * covariance + c2)
                       / ((mean_first ** 2 + mean_second ** 2 + c1) * (var_first + var_second + c2)))
    assert abs(ssim_map(first, second).data[row, col] - expected) < 1e-12


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_ssim_shape_mismatch():
    ssim_map(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)))


def test_exact_reconstruction_wins():
    rng = np.random.default_rng(4)
    targets = _patches(rng)
    reconstructions = np.stack([_patches(rng), targets, _patches(rng)])
    batch = PatchBatch(targets, reconstructions, np.ones((2, 8, 8)))
    assert photometric_loss(batch).item() == 0.0


def test_uniform_offset_hand_trace():
    targets = np.full((1, 8, 8, 3), 0.4)
    batch = PatchBatch(targets, (targets + 0.1)[None], np.ones((1, 8, 8)))
    c1 = 0.01 ** 2
    ssim = (2 * 0.4 * 0.5 + c1) / (0.4 ** 2 + 0.5 ** 2 + c1)
    expected = 0.15 * 0.1 + 0.85 * (1.0 - ssim) / 2.0
    assert abs(photometric_loss(batch).item() - expected) < 1e-12


def test_min_never_exceeds_single_view_cost():
    rng = np.random.default_rng(5)
    targets = _patches(rng)
    reconstructions = np.stack([_patches(rng) for _ in range(3)])
    loss = photometric_loss(PatchBatch(targets, reconstructions, np.ones((2, 8, 8)))).item()
    for view in range(3):
        single = photometric_loss(PatchBatch(targets, reconstructions[view:view + 1], np.ones((2, 8, 8)))).item()
        assert loss <= single


def test_permutation_invariant_and_adding_views_helps():
    rng = np.random.default_rng(6)
    targets = _patches(rng)
    reconstructions = np.stack([_patches(rng) for _ in range(3)])
    depth = np.ones((2, 8, 8))
    loss = photometric_loss(PatchBatch(targets, reconstructions, depth)).item()
    assert loss == photometric_loss(PatchBatch(targets, reconstructions[::-1], depth)).item()
    assert loss <= photometric_loss(PatchBatch(targets, reconstructions[:2], depth)).item()


def test_costs_shape():
    rng = np.random.default_rng(7)
    costs = reconstruction_costs(PatchBatch(_patches(rng), np.stack([_patches(rng)] * 2), np.ones((2, 8, 8))))
    assert costs.shape == (2, 2, 8, 8)
    assert costs.data.min() >= 0.0


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_no_render_views():
    photometric_loss(PatchBatch(np.zeros((1, 8, 8, 3)), np.zeros((0, 1, 8, 8, 3)), np.ones((1, 8, 8))))


def test_constant_depth_is_smooth():
    rng = np.random.default_rng(8)
    assert edge_aware_smoothness(np.full((2, 8, 8), 7.0), _patches(rng)).item() == 0.0


def test_disparity_ramp_on_flat_image():
    disparity = np.tile(1.0 + 0.1 * np.arange(8.0), (8, 1))
    normalised_slope = 0.1 / disparity.mean()
    loss = edge_aware_smoothness((1.0 / disparity)[None], np.full((1, 8, 8, 3), 0.5)).item()
    assert abs(loss - normalised_slope) < 1e-12


def test_edges_relax_smoothness():
    disparity = np.tile(1.0 + 0.1 * np.arange(8.0), (8, 1))[None]
    flat = edge_aware_smoothness(1.0 / disparity, np.zeros((1, 8, 8, 3))).item()
    striped = np.zeros((1, 8, 8, 3))
    striped[:, :, 1::2] = 1.0
    assert edge_aware_smoothness(1.0 / disparity, striped).item() < flat


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_nonpositive_depth():
    edge_aware_smoothness(np.zeros((1, 4, 4)), np.zeros((1, 4, 4, 3)))


def test_total_without_smoothness_is_photometric():
    rng = np.random.default_rng(9)
    batch = PatchBatch(_patches(rng), np.stack([_patches(rng)]), rng.uniform(3.0, 20.0, size=(2, 8, 8)))
    config = LossConfig(lambda_eas=0.0)
    assert total_loss(batch, config).item() == photometric_loss(batch, config).item()
    assert LossConfig().lambda_eas == 1e-3


def test_total_loss_gradients():
    rng = np.random.default_rng(10)
    targets = _patches(rng, 1)
    # offsets and ramps keep every absolute value away from its kink
    offsets = rng.uniform(0.05, 0.3, size=(1, 1, 8, 8, 3)) * rng.choice([-1.0, 1.0], size=(1, 1, 8, 8, 3))
    reconstructions = targets[None] + offsets
    rows, cols = np.meshgrid(np.arange(8.0), np.arange(8.0), indexing='ij')
    depth = (3.0 + 2.0 * cols + rows + rng.uniform(0.0, 0.1, size=(8, 8)))[None]
    config = LossConfig(lambda_eas=0.5)

    def from_reconstructions(values):
        return total_loss(PatchBatch(targets, values, depth), config).item()

    def from_depth(values):
        return total_loss(PatchBatch(targets, reconstructions, values), config).item()

    with Graph() as graph:
        leaf_colors = graph.leaf('colors', reconstructions)
        leaf_depth = graph.leaf('depth', depth)
        loss = total_loss(PatchBatch(targets, leaf_colors, leaf_depth), config)
    grads = backward(graph, loss)
    assert relative_error(grads['colors'].data, finite_diff_grad(from_reconstructions, reconstructions)) < 1e-3
    assert relative_error(grads['depth'].data, finite_diff_grad(from_depth, depth)) < 1e-3


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_negative_weight():
    LossConfig(lambda_l1=-0.1)
