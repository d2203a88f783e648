"""Camera rigs driving through a scene and the density / loss / render roles of their frames

Frames come in stereo pairs: the left camera of a pair at time t, the right one displaced by the baseline along the
camera right axis. Pair 0 is the reference, its left camera defines the world frame.
"""
import logging
import typing
from dataclasses import dataclass

import numpy as np

from densfield.core.constants import FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel
from densfield.synthetic.oracle import render_gt_image
from densfield.synthetic.scene import SceneGT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RigConfig:
    """Stereo rig moving forward along z"""
    n_cameras: int = 6
    n_density_views: int = 3
    image_width: int = 96
    image_height: int = 64
    focal_px: float = 32.0
    baseline: float = 0.54
    speed: float = 5.0
    time_offset_min: float = 0.1
    time_offset_max: float = 0.8
    yaw_jitter_deg: float = 1.0
    density_loss_overlap: bool = True
    gt_step: float = 0.05
    gt_far: float = 60.0

    def __post_init__(self):
        if self.n_cameras < 3:
            raise DensFieldContractViolation("a frameset needs at least 3 cameras to separate density, loss and "
                                             "render roles, got {}".format(self.n_cameras))
        if not 1 <= self.n_density_views <= self.n_cameras:
            raise DensFieldContractViolation("n_density_views must lie in [1, {}], got {}".format(
                self.n_cameras, self.n_density_views))
        if not 0.0 <= self.time_offset_min <= self.time_offset_max:
            raise DensFieldContractViolation("bad time offset range [{}, {}]".format(
                self.time_offset_min, self.time_offset_max))

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'RigConfig':
        return cls(settings['n_cameras'], settings['n_density_views'], settings['image_width'],
                   settings['image_height'], settings['focal_px'], settings['baseline'], settings['rig_speed'],
                   settings['time_offset_min'], settings['time_offset_max'], settings['yaw_jitter_deg'],
                   settings['density_loss_overlap'], settings['gt_step'], settings['gt_far'])

    def base_camera(self) -> CameraModel:
        """The reference camera: principal point at the image center, identity pose"""
        return CameraModel(self.focal_px, self.focal_px, (self.image_width - 1) / 2.0, (self.image_height - 1) / 2.0,
                           self.image_width, self.image_height)


class Frame(typing.NamedTuple):
    image: np.ndarray  # (H, W, 3) in [0, 1]
    camera: CameraModel
    timestamp: int  # index of the stereo pair the frame belongs to


class FrameSet(typing.NamedTuple):
    """Frames of one training item and the indices of their roles"""
    frames: typing.Tuple[Frame, ...]
    density: typing.Tuple[int, ...]  # I_D, the reference frame first
    loss: typing.Tuple[int, ...]  # I_L
    render: typing.Tuple[int, ...]  # I_R

    @property
    def cameras(self) -> typing.List[CameraModel]:
        return [frame.camera for frame in self.frames]

    def check_roles(self) -> None:
        """Raise unless I_D is a nonempty subset of I and I_L, I_R partition I"""
        indices = set(range(len(self.frames)))
        density, loss, render = set(self.density), set(self.loss), set(self.render)
        problems = []
        if not density or not density <= indices or len(density) != len(self.density):
            problems.append("density views {} are not a nonempty subset of {}".format(self.density, sorted(indices)))
        if loss & render:
            problems.append("loss and render views share {}".format(sorted(loss & render)))
        if loss | render != indices or len(loss) != len(self.loss) or len(render) != len(self.render):
            problems.append("loss {} and render {} views do not cover {}".format(
                self.loss, self.render, sorted(indices)))
        if not loss or not render:
            problems.append("loss {} and render {} views must both be nonempty".format(self.loss, self.render))
        if problems:
            raise DensFieldContractViolation('; '.join(problems))


def yaw_rotation(angle: float) -> np.ndarray:
    """Rotation about the y (down) axis by angle radians

    >>> yaw_rotation(0.0)[0].tolist()
    [1.0, 0.0, 0.0]
    """
    cos, sin = np.cos(angle), np.sin(angle)
    return np.array([[cos, 0.0, sin], [0.0, 1.0, 0.0], [-sin, 0.0, cos]], dtype=FLOAT_DTYPE)


def rig_cameras(rig: RigConfig, rng: np.random.Generator) -> typing.Tuple[typing.List[CameraModel], typing.List[int]]:
    """Cameras of every frame and the pair index they belong to

    Pair p sits at z = speed * (sum of p offsets drawn from the configured range), its right camera one baseline
    along the left camera's right axis. Every camera but the reference gets a small random yaw.
    """
    base = rig.base_camera()
    cameras, timestamps = [], []
    position = 0.0
    jitter = np.deg2rad(rig.yaw_jitter_deg)
    for index in range(rig.n_cameras):
        pair, side = divmod(index, 2)
        if index and not side:
            position += rig.speed * rng.uniform(rig.time_offset_min, rig.time_offset_max)
        pose = np.eye(4)
        pose[:3, :3] = yaw_rotation(rng.uniform(-jitter, jitter)) if index else np.eye(3)
        pose[:3, 3] = [0.0, 0.0, position]
        if side:
            pose[:3, 3] += rig.baseline * cameras[-1].rotation[:, 0]
        cameras.append(base.with_pose(pose))
        timestamps.append(pair)
    return cameras, timestamps


def assign_roles(n_frames: int, n_density_views: int, density_loss_overlap: bool,
                 rng: np.random.Generator) -> typing.Tuple[typing.Tuple[int, ...], ...]:
    """Draw I_D, I_L and I_R for n_frames frames laid out as stereo pairs

    I_D is frame 0 plus randomly chosen others. Every pair sends one frame to I_L and the other to I_R by a coin
    flip, a trailing unpaired frame goes to I_R. Without overlap a density frame is pushed to I_R when its partner
    can take the loss role.

    Returns:
        (density, loss, render) index tuples
    """
    others = rng.permutation(np.arange(1, n_frames))[:n_density_views - 1]
    density = (0,) + tuple(sorted(int(index) for index in others))
    loss, render = [], []
    for first in range(0, n_frames - 1, 2):
        pair = [first, first + 1] if rng.uniform() < 0.5 else [first + 1, first]
        if not density_loss_overlap and pair[0] in density and pair[1] not in density:
            pair.reverse()
        loss.append(pair[0])
        render.append(pair[1])
    if n_frames % 2:
        render.append(n_frames - 1)
    return density, tuple(sorted(loss)), tuple(sorted(render))


def build_frameset(scene: SceneGT, rig: RigConfig, seed: int) -> FrameSet:
    """Cameras, ground truth images and roles of one training item

    Args:
        scene: the scene the rig drives through
        rig: camera count, baseline, time offsets, yaw jitter and image size
        seed: the frameset is a pure function of scene, rig and seed

    Returns:
        a frameset whose roles satisfy check_roles
    """
    rng = np.random.default_rng(seed)
    cameras, timestamps = rig_cameras(rig, rng)
    density, loss, render = assign_roles(rig.n_cameras, rig.n_density_views, rig.density_loss_overlap, rng)
    frames = tuple(Frame(quantize_image(render_gt_image(scene, camera, rig.gt_step, rig.gt_far)), camera, timestamp)
                   for camera, timestamp in zip(cameras, timestamps))
    frameset = FrameSet(frames, density, loss, render)
    frameset.check_roles()
    logger.debug("frameset for scene %d: density %s loss %s render %s", scene.seed, density, loss, render)
    return frameset


def quantize_image(image: np.ndarray) -> np.ndarray:
    """Round to the 8 bit levels a PPM file stores, so images survive a write and read unchanged

    >>> quantize_image(np.array([0.0, 0.5, 1.2])).tolist()
    [0.0, 0.5019607843137255, 1.0]
    """
    return np.round(np.clip(image, 0.0, 1.0) * 255.0) / 255.0


def flip_frameset(frameset: FrameSet) -> FrameSet:
    """Mirror every image horizontally together with its camera, roles unchanged"""
    frames = tuple(Frame(np.ascontiguousarray(frame.image[:, ::-1]), frame.camera.mirrored(), frame.timestamp)
                   for frame in frameset.frames)
    return frameset._replace(frames=frames)


def jitter_colors(frameset: FrameSet, strength: float, rng: np.random.Generator) -> FrameSet:
    """One brightness and contrast change, each within +-strength, applied to every image of the frameset"""
    brightness = rng.uniform(1.0 - strength, 1.0 + strength)
    contrast = rng.uniform(1.0 - strength, 1.0 + strength)
    frames = tuple(frame._replace(image=np.clip(((frame.image - 0.5) * contrast + 0.5) * brightness, 0.0, 1.0))
                   for frame in frameset.frames)
    return frameset._replace(frames=frames)


def augment_frameset(frameset: FrameSet, rng: np.random.Generator, color_jitter: bool = True,
                     strength: float = 0.1, flip: bool = True, flip_probability: float = 0.5) -> FrameSet:
    """The training augmentation: joint color jitter and a random joint horizontal flip"""
    if color_jitter:
        frameset = jitter_colors(frameset, strength, rng)
    if flip and rng.uniform() < flip_probability:
        frameset = flip_frameset(frameset)
    return frameset
