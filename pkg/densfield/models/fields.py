"""Density fields: callables mapping (N, 3) world points to (N,) densities

The renderer, the distillation stage and the occupancy evaluation only ever talk to a field, so the learned heads and
the ground truth oracle are interchangeable.
"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, FEATURE_CHANNELS, PE_DIM
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel, project_points
from densfield.models.backbone import sample_features
from densfield.models.heads import density_mv, density_sv, normalize_depth, normalize_pixels, positional_encoding
from densfield.models.layers import BoundParams
from densfield.tensor import Tensor
from densfield.tensor import ops


class ViewQuery(typing.NamedTuple):
    """Per-view lookups for N points in K views"""
    features: Tensor  # (N, K, 64)
    encodings: np.ndarray  # (N, K, 39)
    mask: np.ndarray  # (N, K)


def query_views(points, cameras: typing.Sequence[CameraModel], feature_maps: typing.Sequence[Tensor],
                z_near: float, z_far: float) -> ViewQuery:
    """Project points in to every view and gather features and positional encodings

    Pixels of points outside a view are clamped in to the image, their lookups are masked out downstream.
    """
    if len(cameras) != len(feature_maps) or not cameras:
        raise DensFieldContractViolation("need one feature map per camera, got {} cameras and {} maps".format(
            len(cameras), len(feature_maps)))
    points = np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3)
    n_points = len(points)
    features, encodings, masks = [], [], []
    for camera, feature_map in zip(cameras, feature_maps):
        pixels, depths, valid = project_points(camera, points)
        pixels = np.where(valid[:, None], pixels, 0.0)
        depths = np.where(valid, depths, z_far)
        features.append(ops.reshape(sample_features(feature_map, pixels), (n_points, 1, FEATURE_CHANNELS)))
        encoded = positional_encoding(np.concatenate(
            [normalize_depth(depths, z_near, z_far)[:, None], normalize_pixels(pixels, camera.width, camera.height)],
            axis=-1))
        encodings.append(encoded.reshape(n_points, 1, PE_DIM))
        masks.append(valid)
    return ViewQuery(ops.concat(features, axis=1), np.concatenate(encodings, axis=1), np.stack(masks, axis=-1))


class MultiViewField:
    """phi_MV over the encoded density views"""

    def __init__(self, params: BoundParams, cameras: typing.Sequence[CameraModel],
                 feature_maps: typing.Sequence[Tensor], z_near: float, z_far: float, head_size: str = 'middle'):
        self.params = params
        self.cameras = list(cameras)
        self.feature_maps = list(feature_maps)
        self.z_near = z_near
        self.z_far = z_far
        self.head_size = head_size

    def densities_and_weights(self, points) -> typing.Tuple[Tensor, Tensor]:
        query = query_views(points, self.cameras, self.feature_maps, self.z_near, self.z_far)
        return density_mv(query.features, query.encodings, query.mask, self.params, self.head_size)

    def __call__(self, points) -> Tensor:
        return self.densities_and_weights(points)[0]


class SingleViewField:
    """phi_SV on one encoded view, points outside that view's frustum are empty"""

    def __init__(self, params: BoundParams, camera: CameraModel, feature_map: Tensor, z_near: float, z_far: float):
        self.params = params
        self.camera = camera
        self.feature_map = feature_map
        self.z_near = z_near
        self.z_far = z_far

    def visible(self, points) -> np.ndarray:
        """Which points project in to the view"""
        return project_points(self.camera, np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3))[2]

    def __call__(self, points) -> Tensor:
        query = query_views(points, [self.camera], [self.feature_map], self.z_near, self.z_far)
        sigma = density_sv(query.features[:, 0, :], query.encodings[:, 0, :], self.params)
        return sigma * query.mask[:, 0].astype(FLOAT_DTYPE)


class ConstantField:
    """Wraps any numpy density function as an untracked field, e.g. the ground truth oracle"""

    def __init__(self, function: typing.Callable[[np.ndarray], np.ndarray]):
        self.function = function

    def __call__(self, points) -> Tensor:
        points = np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3)
        return Tensor(self.function(points))


def evaluate_field(field: typing.Callable[[np.ndarray], Tensor], points, chunk_size: int = 8192) -> np.ndarray:
    """Densities of a large point set, evaluated chunk by chunk without recording gradients"""
    points = np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3)
    chunks = [field(points[start:start + chunk_size]).data for start in range(0, len(points), chunk_size)]
    return np.concatenate(chunks) if chunks else np.zeros(0)
