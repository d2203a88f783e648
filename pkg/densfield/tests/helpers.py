# pylint: disable=missing-function-docstring
"""Shared builders for the test suites"""
import numpy as np

from densfield.core.config import resolve_settings
from densfield.geometry import CameraModel
from densfield.synthetic.scene import Box, SceneGT


def rotation_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    cross = np.array([[0.0, -axis[2], axis[1]], [axis[2], 0.0, -axis[0]], [-axis[1], axis[0], 0.0]])
    return np.eye(3) + np.sin(angle) * cross + (1.0 - np.cos(angle)) * cross @ cross


def random_pose(rng, max_angle: float = 0.3, max_offset: float = 2.0) -> np.ndarray:
    pose = np.eye(4)
    pose[:3, :3] = rotation_from_axis_angle(rng.normal(size=3), rng.uniform(-max_angle, max_angle))
    # re-orthonormalise so the pose passes the 1e-9 rotation check regardless of rounding
    u, _, vt = np.linalg.svd(pose[:3, :3])
    pose[:3, :3] = u @ vt
    pose[:3, 3] = rng.uniform(-max_offset, max_offset, size=3)
    return pose


def random_camera(rng) -> CameraModel:
    width = int(rng.integers(4, 17)) * 4
    height = int(rng.integers(4, 17)) * 4
    focal = rng.uniform(20.0, 100.0)
    return CameraModel(focal, focal * rng.uniform(0.9, 1.1), (width - 1) / 2.0 + rng.uniform(-2.0, 2.0),
                       (height - 1) / 2.0 + rng.uniform(-2.0, 2.0), width, height, random_pose(rng))


# a desk config shrunk until a whole pipeline runs in seconds
SMALL_OVERRIDES = {
    'image_width': 32,
    'image_height': 16,
    'focal_px': 16.0,
    'n_cameras': 4,
    'n_density_views': 2,
    'n_samples': 8,
    'grid_nx': 8,
    'grid_ny': 4,
    'grid_nz': 8,
    'batch_size': 1,
    'patches_per_item': 2,
    'patch_size': 4,
    'steps_mv': 4,
    'steps_kd': 2,
    'log_every': 1,
    'n_scenes': 2,
    'n_test_scenes': 1,
}


def small_settings(**overrides):
    """Resolved settings for SMALL_OVERRIDES updated with overrides"""
    values = dict(SMALL_OVERRIDES, **overrides)
    return resolve_settings(overrides=['{}={}'.format(key, value) for key, value in values.items()])


def wall_scene(depth: float = 10.0, albedo=(1.0, 0.0, 0.0), sigma_solid: float = 50.0) -> SceneGT:
    """A 1m thick wall filling the view at the given depth, no ground in sight"""
    wall = Box((0.0, 0.0, depth + 0.5), (100.0, 100.0, 1.0), tuple(albedo))
    return SceneGT((wall,), (), 1e6, (0.0, 0.0, 0.0), sigma_solid, ((-50.0, -50.0, depth), (50.0, 50.0, depth + 1.0)),
                   0)
