"""Pinhole cameras, projection and ray casting

Poses map camera coordinates to world coordinates. Camera axes are x right, y down, z forward and pixel
centers sit at integer coordinates.
"""
import typing
from pathlib import Path

import numpy as np

from densfield.core.constants import FLOAT_DTYPE, MIN_IMAGE_EXTENT, ROTATION_TOLERANCE
from densfield.core.exceptions import DensFieldContractViolation, DensFieldParseError, DensFieldIOError


class CameraModel:
    """Intrinsics, image extent and camera to world pose of one frame

    >>> camera = CameraModel(100.0, 100.0, 50.0, 40.0, 96, 64)
    >>> camera.center.tolist()
    [0.0, 0.0, 0.0]
    """
    __slots__ = ('fx', 'fy', 'cx', 'cy', 'width', 'height', '_pose')

    def __init__(self, fx: float, fy: float, cx: float, cy: float, width: int, height: int,
                 pose: typing.Optional[np.ndarray] = None):
        if not (fx > 0.0 and fy > 0.0):
            raise DensFieldContractViolation("focal lengths must be positive, got fx={} fy={}".format(fx, fy))
        if width < MIN_IMAGE_EXTENT or height < MIN_IMAGE_EXTENT:
            raise DensFieldContractViolation("images must be at least {0}x{0} pixels, got {1}x{2}".format(
                MIN_IMAGE_EXTENT, width, height))
        pose = np.eye(4, dtype=FLOAT_DTYPE) if pose is None else np.array(pose, dtype=FLOAT_DTYPE)
        if pose.shape != (4, 4) or not np.array_equal(pose[3], [0.0, 0.0, 0.0, 1.0]):
            raise DensFieldContractViolation("pose must be a 4x4 rigid transform")
        rotation = pose[:3, :3]
        if (np.max(np.abs(rotation.T @ rotation - np.eye(3))) > ROTATION_TOLERANCE
                or np.linalg.det(rotation) <= 0.0):
            raise DensFieldContractViolation("pose rotation is not orthonormal within {}".format(ROTATION_TOLERANCE))
        pose.flags.writeable = False
        self.fx = float(fx)
        self.fy = float(fy)
        self.cx = float(cx)
        self.cy = float(cy)
        self.width = int(width)
        self.height = int(height)
        self._pose = pose

    @property
    def pose(self) -> np.ndarray:
        """4x4 camera to world transform"""
        return self._pose

    @property
    def rotation(self) -> np.ndarray:
        return self._pose[:3, :3]

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates"""
        return self._pose[:3, 3]

    @property
    def intrinsics(self) -> np.ndarray:
        """The 3x3 matrix K"""
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def with_pose(self, pose: np.ndarray) -> 'CameraModel':
        return CameraModel(self.fx, self.fy, self.cx, self.cy, self.width, self.height, pose)

    def mirrored(self) -> 'CameraModel':
        """The camera seeing the horizontally flipped image of the x-mirrored world"""
        mirror = np.diag([-1.0, 1.0, 1.0, 1.0])
        return CameraModel(self.fx, self.fy, self.width - 1 - self.cx, self.cy, self.width, self.height,
                           mirror @ self._pose @ mirror)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CameraModel):
            return NotImplemented
        return ((self.fx, self.fy, self.cx, self.cy, self.width, self.height) ==
                (other.fx, other.fy, other.cx, other.cy, other.width, other.height)
                and np.array_equal(self._pose, other._pose))

    def __repr__(self) -> str:
        return "CameraModel(fx={}, fy={}, cx={}, cy={}, width={}, height={}, center={})".format(
            self.fx, self.fy, self.cx, self.cy, self.width, self.height, self.center.tolist())


class Ray(typing.NamedTuple):
    origin: np.ndarray
    direction: np.ndarray

    def point_at(self, distance: float) -> np.ndarray:
        """The world point at the given distance along the ray"""
        return self.origin + distance * self.direction


def in_image(camera: CameraModel, pixels: np.ndarray) -> np.ndarray:
    """Whether continuous pixels (..., 2) lie inside [0, W-1] x [0, H-1]"""
    pixels = np.asarray(pixels, dtype=FLOAT_DTYPE)
    return ((pixels[..., 0] >= 0.0) & (pixels[..., 0] <= camera.width - 1)
            & (pixels[..., 1] >= 0.0) & (pixels[..., 1] <= camera.height - 1))


def project_points(camera: CameraModel, points: np.ndarray) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batched projection of (..., 3) world points

    Returns:
        pixels (..., 2), depths (...) along the optical axis and the valid flags (...)
    """
    points = np.asarray(points, dtype=FLOAT_DTYPE)
    local = (points - camera.center) @ camera.rotation
    depths = local[..., 2]
    in_front = depths > 0.0
    safe_depths = np.where(in_front, depths, 1.0)
    pixels = np.stack([camera.fx * local[..., 0] / safe_depths + camera.cx,
                       camera.fy * local[..., 1] / safe_depths + camera.cy], axis=-1)
    return pixels, depths, in_front & in_image(camera, pixels)


def project(camera: CameraModel, point) -> typing.Tuple[np.ndarray, float, bool]:
    """Project one world point

    Args:
        camera: the camera to project in to
        point: world 3-vector

    Returns:
        continuous pixel (u, v), depth along the optical axis, and whether the point is in front of the camera
        and inside the image

    >>> pixel, depth, valid = project(CameraModel(100.0, 100.0, 50.0, 40.0, 96, 64), [1.0, 0.0, 2.0])
    >>> pixel.tolist(), depth, valid
    ([100.0, 40.0], 2.0, False)
    """
    pixels, depths, valid = project_points(camera, np.reshape(point, (1, 3)))
    return pixels[0], float(depths[0]), bool(valid[0])


def rays_through_pixels(camera: CameraModel, pixels) -> typing.Tuple[np.ndarray, np.ndarray]:
    """Origins (N, 3) and unit directions (N, 3) of the rays through N pixels inside the image"""
    pixels = np.asarray(pixels, dtype=FLOAT_DTYPE).reshape(-1, 2)
    inside = in_image(camera, pixels)
    if not np.all(inside):
        raise DensFieldContractViolation("pixel {} is outside the {}x{} image".format(
            pixels[~inside][0].tolist(), camera.width, camera.height))
    local = np.stack([(pixels[:, 0] - camera.cx) / camera.fx, (pixels[:, 1] - camera.cy) / camera.fy,
                      np.ones(len(pixels))], axis=-1)
    directions = local @ camera.rotation.T
    directions /= np.linalg.norm(directions, axis=-1, keepdims=True)
    return np.broadcast_to(camera.center, directions.shape).copy(), directions


def ray_through_pixel(camera: CameraModel, pixel) -> Ray:
    """The ray from the camera center through a pixel

    >>> ray_through_pixel(CameraModel(1.0, 1.0, 4.0, 4.0, 9, 9), [4.0, 4.0]).direction.tolist()
    [0.0, 0.0, 1.0]
    """
    origins, directions = rays_through_pixels(camera, pixel)
    return Ray(origins[0], directions[0])


def frustum_masks(cameras: typing.Sequence[CameraModel], points) -> np.ndarray:
    """(N, K) visibility bits of N points in K cameras"""
    if not cameras:
        raise DensFieldContractViolation("frustum mask needs at least one camera")
    points = np.asarray(points, dtype=FLOAT_DTYPE).reshape(-1, 3)
    return np.stack([project_points(camera, points)[2] for camera in cameras], axis=-1)


def frustum_mask(cameras: typing.Sequence[CameraModel], point) -> np.ndarray:
    """One bit per camera, set when the point projects inside that camera's image with positive depth"""
    return frustum_masks(cameras, point)[0]


def format_camera(camera: CameraModel) -> str:
    """Text form: ``fx fy cx cy W H`` then the four rows of the pose"""
    lines = [' '.join(repr(value) for value in (camera.fx, camera.fy, camera.cx, camera.cy))
             + ' {} {}'.format(camera.width, camera.height)]
    lines.extend(' '.join(repr(float(value)) for value in row) for row in camera.pose)
    return '\n'.join(lines) + '\n'


def parse_camera(text: str, path: typing.Any = '<string>') -> CameraModel:
    """Inverse of format_camera"""
    offset = 0
    rows = []
    for line in text.splitlines(keepends=True):
        if line.strip():
            try:
                rows.append((offset, [float(token) for token in line.split()]))
            except ValueError as err:
                raise DensFieldParseError(path, offset, "not a number in '{}'".format(line.strip())) from err
        offset += len(line.encode('utf-8'))
    if len(rows) != 5:
        raise DensFieldParseError(path, offset, "expected 5 lines, found {}".format(len(rows)))
    header_offset, header = rows[0]
    if len(header) != 6 or not (header[4].is_integer() and header[5].is_integer()):
        raise DensFieldParseError(path, header_offset, "expected 'fx fy cx cy W H'")
    for row_offset, row in rows[1:]:
        if len(row) != 4:
            raise DensFieldParseError(path, row_offset, "expected 4 pose values, found {}".format(len(row)))
    fx, fy, cx, cy, width, height = header
    return CameraModel(fx, fy, cx, cy, int(width), int(height), np.array([row for _, row in rows[1:]]))


def write_camera_file(path, camera: CameraModel) -> None:
    path = Path(path)
    try:
        path.write_bytes(format_camera(camera).encode('utf-8'))
    except OSError as err:
        raise DensFieldIOError("could not write camera {}: {}".format(path, err)) from err


def read_camera_file(path) -> CameraModel:
    path = Path(path)
    try:
        text = path.read_bytes().decode('utf-8')
    except OSError as err:
        raise DensFieldIOError("could not read camera {}: {}".format(path, err)) from err
    except UnicodeDecodeError as err:
        raise DensFieldParseError(path, err.start, "invalid utf-8") from err
    return parse_camera(text, path)
