# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.exceptions import DensFieldContractViolation, DensFieldParseError
from densfield.geometry import CameraModel, project, project_points, ray_through_pixel, frustum_mask, \
    frustum_masks, read_camera_file, write_camera_file
from densfield.geometry.camera import parse_camera, format_camera
from densfield.tests.helpers import random_camera


def test_central_projection():
    camera = CameraModel(1.0, 1.0, 0.0, 0.0, 8, 8)
    pixel, depth, valid = project(camera, [0.0, 0.0, 2.0])
    assert pixel.tolist() == [0.0, 0.0]
    assert depth == 2.0
    assert valid


def test_behind_camera():
    assert not project(CameraModel(1.0, 1.0, 0.0, 0.0, 8, 8), [0.0, 0.0, -1.0])[2]


def test_hand_arithmetic():
    pixel, _, _ = project(CameraModel(100.0, 100.0, 50.0, 30.0, 128, 64), [1.0, 0.0, 2.0])
    assert pixel[0] == 100.0


def test_principal_ray_is_forward_axis():
    rng = np.random.default_rng(2)
    camera = random_camera(rng)
    ray = ray_through_pixel(camera, [camera.cx, camera.cy])
    assert np.allclose(ray.direction, camera.rotation[:, 2], atol=1e-12)


def test_translated_camera_origin():
    pose = np.eye(4)
    pose[:3, 3] = [1.0, -2.0, 3.0]
    camera = CameraModel(20.0, 20.0, 10.0, 10.0, 20, 20, pose)
    assert ray_through_pixel(camera, [3.0, 7.0]).origin.tolist() == [1.0, -2.0, 3.0]


def test_round_trip_many_cameras():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        camera = random_camera(rng)
        pixel = rng.uniform(0.0, 1.0, size=2) * [camera.width - 1, camera.height - 1]
        ray = ray_through_pixel(camera, pixel)
        assert abs(np.linalg.norm(ray.direction) - 1.0) < 1e-12
        projected, depth, valid = project(camera, ray.point_at(rng.uniform(0.5, 50.0)))
        assert valid and depth > 0.0
        assert np.max(np.abs(projected - pixel)) < 1e-6


def test_frustum_mask_matches_project():
    rng = np.random.default_rng(1)
    cameras = [random_camera(rng) for _ in range(5)]
    points = rng.normal(scale=5.0, size=(50, 3)) + [0.0, 0.0, 8.0]
    masks = frustum_masks(cameras, points)
    for point, mask in zip(points, masks):
        assert mask.tolist() == [project(camera, point)[2] for camera in cameras]
        assert frustum_mask(cameras, point).tolist() == mask.tolist()


def test_frustum_mask_permutation_equivariant():
    rng = np.random.default_rng(4)
    cameras = [random_camera(rng) for _ in range(4)]
    points = rng.normal(scale=5.0, size=(30, 3)) + [0.0, 0.0, 8.0]
    order = [2, 0, 3, 1]
    assert np.array_equal(frustum_masks([cameras[i] for i in order], points), frustum_masks(cameras, points)[:, order])


def test_all_ones_and_all_zeros():
    cameras = [CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9) for _ in range(3)]
    assert frustum_mask(cameras, [0.0, 0.0, 5.0]).tolist() == [True, True, True]
    assert frustum_mask(cameras, [0.0, 0.0, -5.0]).tolist() == [False, False, False]


def test_project_points_batch_shape():
    pixels, depths, valid = project_points(CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9), np.ones((2, 5, 3)))
    assert pixels.shape == (2, 5, 2) and depths.shape == (2, 5) and valid.shape == (2, 5)


def test_mirrored_camera_sees_flipped_image():
    rng = np.random.default_rng(6)
    camera = random_camera(rng)
    mirrored = camera.mirrored()
    point = camera.center + 6.0 * camera.rotation[:, 2] + 0.3 * camera.rotation[:, 0]
    pixel, _, _ = project(camera, point)
    flipped, _, _ = project(mirrored, point * [-1.0, 1.0, 1.0])
    assert np.allclose(flipped, [camera.width - 1 - pixel[0], pixel[1]], atol=1e-9)


def test_camera_file_round_trip(tmp_path):
    camera = random_camera(np.random.default_rng(3))
    write_camera_file(tmp_path / 'frame.cam', camera)
    assert read_camera_file(tmp_path / 'frame.cam') == camera


def test_parse_error_names_offset():
    text = format_camera(CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9)).replace('0.0 1.0 0.0', '0.0 x 0.0', 1)
    with pytest.raises(DensFieldParseError) as info:
        parse_camera(text, 'bad.cam')
    assert info.value.offset > 0


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_out_of_bounds_pixel():
    ray_through_pixel(CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9), [8.5, 0.0])


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_non_positive_focal():
    CameraModel(0.0, 10.0, 4.0, 4.0, 9, 9)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_tiny_image():
    CameraModel(10.0, 10.0, 2.0, 2.0, 4, 4)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_non_orthonormal_pose():
    CameraModel(10.0, 10.0, 4.0, 4.0, 9, 9, np.diag([1.0, 2.0, 1.0, 1.0]))


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_empty_camera_list():
    frustum_mask([], [0.0, 0.0, 1.0])
