"""Image based volume rendering

Colors are not predicted: every sample point is projected in to the render views and the colors found there are
alpha composited with the weights of the density field along the ray.
"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel, project_points, rays_through_pixels, sample_rays_points, SamplerConfig, \
    RaySamples
from densfield.tensor import Tensor, as_tensor
from densfield.tensor import ops
from densfield.tensor.ops import bilinear_corners

DensityField = typing.Callable[[np.ndarray], Tensor]


class RenderView(typing.NamedTuple):
    """An image (H, W, 3) and the camera that took it"""
    image: np.ndarray
    camera: CameraModel


class CompositeResult(typing.NamedTuple):
    colors: typing.Optional[Tensor]  # (K, ..., 3), one reconstruction per render view
    depth: Tensor  # (...) expected termination depth
    weights: Tensor  # (..., M) contribution of every sample
    transmittance: Tensor  # (...) left over after the last sample
    filled_depth: Tensor  # (...) depth with the left over transmittance placed at the far plane


def sample_colors(image: np.ndarray, camera: CameraModel, points) -> typing.Tuple[np.ndarray, np.ndarray]:
    """Bilinear colors of (..., 3) world points seen by camera, zero where the projection is invalid

    Returns:
        colors (..., 3) and valid flags (...)
    """
    points = np.asarray(points, dtype=FLOAT_DTYPE)
    image = np.asarray(image, dtype=FLOAT_DTYPE)
    pixels, _, valid = project_points(camera, points)
    flat_pixels = np.where(valid[..., None], pixels, 0.0).reshape(-1, 2)
    height, width = image.shape[:2]
    x0, y0, weights = bilinear_corners(flat_pixels, height, width)
    x1 = np.minimum(x0 + 1, width - 1)
    y1 = np.minimum(y0 + 1, height - 1)
    colors = (image[y0, x0] * weights[0][:, None] + image[y0, x1] * weights[1][:, None]
              + image[y1, x0] * weights[2][:, None] + image[y1, x1] * weights[3][:, None])
    colors = colors.reshape(points.shape[:-1] + (3,)) * valid[..., None]
    return colors, valid


def sample_color(image: np.ndarray, camera: CameraModel, point) -> typing.Tuple[np.ndarray, bool]:
    """Color of the image where a world point projects, and whether the projection is valid

    >>> camera = CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9)
    >>> color, valid = sample_color(np.full((9, 9, 3), 0.5), camera, [0.0, 0.0, 2.0])
    >>> color.tolist(), valid
    ([0.5, 0.5, 0.5], True)
    """
    colors, valid = sample_colors(image, camera, np.reshape(point, (1, 3)))
    return colors[0], bool(valid[0])


def composite(sigmas, samples: RaySamples, colors=None, far: typing.Optional[float] = None) -> CompositeResult:
    """Alpha composite densities along rays

    Args:
        sigmas: (..., M) non negative densities
        samples: depths and deltas (..., M) of the same rays
        colors: optional (K, ..., M, 3) sample colors per render view, invalid samples already zeroed
        far: depth that absorbs the left over transmittance in filled_depth, the last sample depth by default

    Returns:
        the reconstructed colors, expected depth, weights T_i alpha_i, final transmittance and filled depth

    >>> from densfield.geometry import RaySamples
    >>> samples = RaySamples(np.array([1.0, 2.0, 3.0]), np.ones(3), np.zeros((3, 3)))
    >>> composite(np.zeros(3), samples).transmittance.item()
    1.0
    """
    sigmas = as_tensor(sigmas)
    if np.any(sigmas.data < 0.0):
        raise DensFieldContractViolation("densities must be non negative, found {}".format(sigmas.data.min()))
    if sigmas.shape != samples.depths.shape:
        raise DensFieldContractViolation("{} densities for {} samples".format(sigmas.shape, samples.depths.shape))
    optical = sigmas * samples.deltas
    alphas = 1.0 - ops.exp(-optical)
    transmittance = ops.exp(-ops.cumsum(optical, axis=-1, exclusive=True))
    weights = transmittance * alphas
    remaining = ops.exp(-ops.reduce_sum(optical, axis=-1))
    depth = ops.reduce_sum(weights * samples.depths, axis=-1)
    far = samples.depths[..., -1] if far is None else far
    filled = depth + remaining * far
    reconstructed = None
    if colors is not None:
        colors = as_tensor(colors)
        if colors.shape[1:] != samples.depths.shape + (3,):
            raise DensFieldContractViolation("colors {} do not match samples {}".format(
                colors.shape, samples.depths.shape))
        expanded = ops.reshape(weights, (1,) + weights.shape + (1,))
        reconstructed = ops.reduce_sum(expanded * colors, axis=-2)
    return CompositeResult(reconstructed, depth, weights, remaining, filled)


def render_rays(field: DensityField, origins, directions, views: typing.Sequence[RenderView],
                sampler: SamplerConfig, rng: typing.Optional[np.random.Generator] = None) -> CompositeResult:
    """Render N rays: sample, query the field, fetch colors from every render view, composite"""
    samples = sample_rays_points(origins, directions, sampler, rng)
    n_rays, n_samples = samples.depths.shape
    sigmas = ops.reshape(field(samples.points.reshape(-1, 3)), (n_rays, n_samples))
    colors = np.stack([sample_colors(view.image, view.camera, samples.points)[0] for view in views]) \
        if views else None
    return composite(sigmas, samples, colors, far=sampler.z_far)


class PatchRender(typing.NamedTuple):
    colors: Tensor  # (K, n_patches, P, P, 3)
    depth: Tensor  # (n_patches, P, P)
    filled_depth: Tensor  # (n_patches, P, P)


def patch_pixels(corners, patch_size: int) -> np.ndarray:
    """(n_patches, P, P, 2) pixel (u, v) grids of patches given by their top left (row, col)"""
    corners = np.asarray(corners, dtype=np.int64).reshape(-1, 2)
    rows, cols = np.meshgrid(np.arange(patch_size), np.arange(patch_size), indexing='ij')
    return np.stack([corners[:, None, None, 1] + cols, corners[:, None, None, 0] + rows], axis=-1).astype(FLOAT_DTYPE)


def render_patches(field: DensityField, camera: CameraModel, corners, patch_size: int,
                   views: typing.Sequence[RenderView], sampler: SamplerConfig,
                   rng: typing.Optional[np.random.Generator] = None) -> PatchRender:
    """Render square patches of the loss view

    Args:
        field: density field to composite
        camera: camera of the loss view, rays are cast through its pixels
        corners: (n_patches, 2) top left (row, col) of every patch, the patches must fit inside the image
        patch_size: edge length P
        views: render views I_R to sample colors from, at least one
        sampler: ray sampling
        rng: required when the sampler jitters

    Returns:
        per render view reconstructions, the expected depth and the filled depth of every patch pixel
    """
    if not views:
        raise DensFieldContractViolation("rendering needs at least one render view")
    pixels = patch_pixels(corners, patch_size)
    if np.any(pixels[..., 0] > camera.width - 1) or np.any(pixels[..., 1] > camera.height - 1) \
            or np.any(pixels < 0.0):
        raise DensFieldContractViolation("patch of size {} at {} leaves the {}x{} image".format(
            patch_size, np.asarray(corners).tolist(), camera.width, camera.height))
    n_patches = pixels.shape[0]
    origins, directions = rays_through_pixels(camera, pixels.reshape(-1, 2))
    result = render_rays(field, origins, directions, views, sampler, rng)
    grid = (n_patches, patch_size, patch_size)
    return PatchRender(ops.reshape(result.colors, (len(views),) + grid + (3,)), ops.reshape(result.depth, grid),
                       ops.reshape(result.filled_depth, grid))


def render_patch(field: DensityField, camera: CameraModel, corner, patch_size: int,
                 views: typing.Sequence[RenderView], sampler: SamplerConfig,
                 rng: typing.Optional[np.random.Generator] = None) -> PatchRender:
    """One patch: colors (K, P, P, 3), depth and filled depth (P, P)"""
    rendered = render_patches(field, camera, [corner], patch_size, views, sampler, rng)
    return PatchRender(rendered.colors[:, 0], rendered.depth[0], rendered.filled_depth[0])


def render_depth_map(field: DensityField, camera: CameraModel, sampler: SamplerConfig,
                     rows_per_chunk: int = 8) -> typing.Tuple[np.ndarray, np.ndarray]:
    """Expected and filled depth (H, W) of every pixel, evaluated without gradients"""
    depth = np.zeros((camera.height, camera.width))
    filled = np.zeros_like(depth)
    cols, rows = np.meshgrid(np.arange(camera.width), np.arange(camera.height))
    pixels = np.stack([cols, rows], axis=-1).astype(FLOAT_DTYPE)
    for start in range(0, camera.height, rows_per_chunk):
        chunk = pixels[start:start + rows_per_chunk]
        origins, directions = rays_through_pixels(camera, chunk.reshape(-1, 2))
        result = render_rays(field, origins, directions, [], sampler)
        depth[start:start + rows_per_chunk] = result.depth.data.reshape(chunk.shape[:2])
        filled[start:start + rows_per_chunk] = result.filled_depth.data.reshape(chunk.shape[:2])
    return depth, filled
