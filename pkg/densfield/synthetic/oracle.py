"""Exact ground truth: density, reference images, depth maps and visibility"""
import typing

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, VISIBILITY_OPTICAL_DEPTH
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel, project_points, rays_through_pixels
from densfield.synthetic import kernels
from densfield.synthetic.scene import SceneGT


def gt_density(scene: SceneGT, points) -> np.ndarray:
    """sigma_solid inside any primitive or below ground, 0 elsewhere

    Args:
        scene: the scene
        points: (3,) or (..., 3) world points

    Returns:
        densities shaped like points without the last axis
    """
    points = np.asarray(points, dtype=FLOAT_DTYPE)
    flat = np.ascontiguousarray(points.reshape(-1, 3))
    densities = kernels.density_kernel(flat, scene.box_array(), scene.sphere_array(), float(scene.ground_height),
                                       float(scene.sigma_solid))
    return densities.reshape(points.shape[:-1])


def _pixel_rays(camera: CameraModel) -> typing.Tuple[np.ndarray, np.ndarray]:
    cols, rows = np.meshgrid(np.arange(camera.width), np.arange(camera.height))
    pixels = np.stack([cols, rows], axis=-1).reshape(-1, 2).astype(FLOAT_DTYPE)
    return rays_through_pixels(camera, pixels)


def march_rays(scene: SceneGT, origins, directions, step: float, far: float):
    """Colors (N, 3), expected distances (N,) and opacities (N,) of N rays marched at a fixed step"""
    if not step > 0.0:
        raise DensFieldContractViolation("marching step must be positive, got {}".format(step))
    return kernels.march_kernel(np.ascontiguousarray(origins, dtype=FLOAT_DTYPE),
                                np.ascontiguousarray(directions, dtype=FLOAT_DTYPE),
                                scene.box_array(), scene.box_albedo_array(), scene.sphere_array(),
                                scene.sphere_albedo_array(), float(scene.ground_height),
                                np.array(scene.ground_albedo, dtype=FLOAT_DTYPE), float(scene.sigma_solid),
                                float(step), float(far))


def render_gt_image(scene: SceneGT, camera: CameraModel, step: float = 0.05, far: float = 60.0) -> np.ndarray:
    """(H, W, 3) flat shaded image: surface albedo composited along each ray, black background"""
    origins, directions = _pixel_rays(camera)
    colors, _, _ = march_rays(scene, origins, directions, step, far)
    return colors.reshape(camera.height, camera.width, 3)


def render_gt_depth(scene: SceneGT, camera: CameraModel, step: float = 0.05,
                    far: float = 60.0) -> typing.Tuple[np.ndarray, np.ndarray]:
    """(H, W) expected termination distance along each ray and the mask of rays that are at least half absorbed

    The distance is normalised by the opacity so a surface hit reads as its distance.
    """
    origins, directions = _pixel_rays(camera)
    _, depths, opacity = march_rays(scene, origins, directions, step, far)
    valid = opacity >= 0.5
    depth = np.where(valid, depths / np.where(valid, opacity, 1.0), 0.0)
    return depth.reshape(camera.height, camera.width), valid.reshape(camera.height, camera.width)


def optical_depths(scene: SceneGT, camera: CameraModel, points) -> np.ndarray:
    """Exact optical depth between the camera center and each of (N, 3) points"""
    points = np.ascontiguousarray(np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3))
    origins = np.ascontiguousarray(np.broadcast_to(camera.center, points.shape))
    lengths = kernels.solid_length_kernel(origins, points, scene.box_array(), scene.sphere_array(),
                                          float(scene.ground_height))
    return scene.sigma_solid * lengths


def visibility(scene: SceneGT, camera: CameraModel, points) -> np.ndarray:
    """Whether the segment from the camera center to each point stays below optical depth ln 2

    Args:
        scene: the scene
        camera: the observing camera
        points: (3,) or (..., 3), all in front of the camera

    Returns:
        flags shaped like points without the last axis
    """
    points = np.asarray(points, dtype=FLOAT_DTYPE)
    _, depths, _ = project_points(camera, points)
    if np.any(depths <= 0.0):
        raise DensFieldContractViolation("visibility is only defined in front of the camera")
    return (optical_depths(scene, camera, points) < VISIBILITY_OPTICAL_DEPTH).reshape(points.shape[:-1])


def observed(scene: SceneGT, cameras: typing.Sequence[CameraModel], points) -> np.ndarray:
    """Whether any camera sees each point: inside its image and not occluded

    Args:
        scene: the scene
        cameras: the inference cameras
        points: (..., 3), points behind a camera simply count as unseen by it

    Returns:
        flags shaped like points without the last axis
    """
    points = np.asarray(points, dtype=FLOAT_DTYPE)
    flat = points.reshape(-1, 3)
    seen = np.zeros(len(flat), dtype=bool)
    for camera in cameras:
        _, _, inside = project_points(camera, flat)
        candidates = inside & ~seen
        if np.any(candidates):
            seen[candidates] = visibility(scene, camera, flat[candidates])
    return seen.reshape(points.shape[:-1])


def occupancy(scene: SceneGT, points) -> np.ndarray:
    """Ground truth occupancy bits of (..., 3) points"""
    return gt_density(scene, points) > 0.0
