"""One optimizer step of each training stage

Stage one (mv) trains the backbone and phi_MV by rendering patches of a loss view from the density views and
comparing them to the loss view. Stage two (kd) freezes both and fits phi_SV to the densities phi_MV predicts.
"""
import logging
import typing
from dataclasses import dataclass, field, replace

import numpy as np

from densfield.core.constants import STAGE_KD, STAGE_MV, SV_HEAD_PREFIX, HEAD_SIZES
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import SamplerConfig, rays_through_pixels, sample_rays_points
from densfield.losses import LossConfig, PatchBatch, kd_loss, total_loss
from densfield.models import MultiViewField, SingleViewField, encode
from densfield.render import RenderView, render_patches
from densfield.render.renderer import patch_pixels
from densfield.synthetic.frames import FrameSet, augment_frameset
from densfield.tensor import Graph, Tensor, adam_step, backward
from densfield.tensor import ops
from densfield.train.checkpoint import Checkpoint

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Everything a training step needs besides the state and the data"""
    batch_size: int = 8
    patches_per_item: int = 32
    patch_size: int = 8
    steps_mv: int = 20000
    steps_kd: int = 2000
    lr: float = 1e-4
    lr_final: float = 1e-5
    lr_final_fraction: float = 0.2
    kd_lr: float = 1e-4
    view_dropout: float = 0.5
    color_jitter: bool = True
    jitter_strength: float = 0.1
    flip: bool = True
    flip_probability: float = 0.5
    head_size: str = 'middle'
    checkpoint_fraction: float = 0.1
    log_every: int = 50
    debug_roles: bool = False
    sampler: SamplerConfig = field(default_factory=lambda: SamplerConfig(jitter=True))
    loss: LossConfig = field(default_factory=LossConfig)

    def __post_init__(self):
        if not 0.0 <= self.view_dropout < 1.0:
            raise DensFieldContractViolation("view_dropout must lie in [0, 1), got {}".format(self.view_dropout))
        if min(self.batch_size, self.patches_per_item, self.patch_size) < 1:
            raise DensFieldContractViolation("batch_size, patches_per_item and patch_size must be positive")
        if self.steps_mv < 0 or self.steps_kd < 0:
            raise DensFieldContractViolation("step counts must be non negative")
        if not 0.0 <= self.lr_final_fraction <= 1.0 or not 0.0 < self.checkpoint_fraction <= 1.0:
            raise DensFieldContractViolation("lr_final_fraction must lie in [0, 1] and checkpoint_fraction in (0, 1]")
        if self.head_size not in HEAD_SIZES:
            raise DensFieldContractViolation("head_size must be one of {}, got '{}'".format(
                sorted(HEAD_SIZES), self.head_size))

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'TrainConfig':
        keys = ('batch_size', 'patches_per_item', 'patch_size', 'steps_mv', 'steps_kd', 'lr', 'lr_final',
                'lr_final_fraction', 'kd_lr', 'view_dropout', 'color_jitter', 'jitter_strength', 'flip',
                'flip_probability', 'head_size', 'checkpoint_fraction', 'log_every', 'debug_roles')
        return cls(*(settings[key] for key in keys), sampler=SamplerConfig.from_settings(settings, jitter=True),
                   loss=LossConfig.from_settings(settings))

    @property
    def rays_per_item(self) -> int:
        return self.patches_per_item * self.patch_size ** 2

    def steps(self, stage: str) -> int:
        return self.steps_mv if stage == STAGE_MV else self.steps_kd


def learning_rate(config: TrainConfig, stage: str, step: int) -> float:
    """lr of a step: constant during distillation, dropped to lr_final for the last part of stage one

    >>> config = TrainConfig(steps_mv=10)
    >>> [learning_rate(config, 'mv', step) for step in (0, 7, 8)]
    [0.0001, 0.0001, 1e-05]
    """
    if stage == STAGE_KD:
        return config.kd_lr
    if step >= int(round(config.steps_mv * (1.0 - config.lr_final_fraction))):
        return config.lr_final
    return config.lr


def view_dropout(density: typing.Sequence[int], rate: float, rng: np.random.Generator) -> typing.Tuple[int, ...]:
    """Keep the first density view, drop every other one independently with probability rate

    >>> view_dropout((0, 2, 5), 0.0, np.random.default_rng(0))
    (0, 2, 5)
    """
    if not density:
        raise DensFieldContractViolation("view dropout needs at least one density view")
    if not 0.0 <= rate <= 1.0:
        raise DensFieldContractViolation("dropout rate must lie in [0, 1], got {}".format(rate))
    draws = rng.uniform(size=len(density) - 1)
    return (density[0],) + tuple(index for index, draw in zip(density[1:], draws) if draw >= rate)


def sample_patch_corners(rng: np.random.Generator, height: int, width: int, patch_size: int,
                         count: int) -> np.ndarray:
    """(count, 2) top left (row, col) of patches placed uniformly over every position that fits"""
    if patch_size > min(height, width):
        raise DensFieldContractViolation("patch of size {} does not fit a {}x{} image".format(
            patch_size, width, height))
    rows = rng.integers(0, height - patch_size + 1, size=count)
    cols = rng.integers(0, width - patch_size + 1, size=count)
    return np.stack([rows, cols], axis=-1)


def gather_patches(image: np.ndarray, corners: np.ndarray, patch_size: int) -> np.ndarray:
    """(n, P, P, 3) image patches at the given corners"""
    pixels = patch_pixels(corners, patch_size).astype(np.int64)
    return image[pixels[..., 1], pixels[..., 0]]


def _prepare(frameset: FrameSet, config: TrainConfig, rng: np.random.Generator) -> FrameSet:
    frameset = augment_frameset(frameset, rng, config.color_jitter, config.jitter_strength, config.flip,
                                config.flip_probability)
    if config.debug_roles:
        frameset.check_roles()
        logger.debug("roles: density %s loss %s render %s", frameset.density, frameset.loss, frameset.render)
    return frameset


def _encode_views(frameset: FrameSet, indices: typing.Sequence[int], bound) -> typing.List[Tensor]:
    return [encode(frameset.frames[index].image, bound) for index in indices]


def _mv_item_loss(frameset: FrameSet, bound, config: TrainConfig, rng: np.random.Generator) -> Tensor:
    density = view_dropout(frameset.density, config.view_dropout, rng)
    field = MultiViewField(bound, [frameset.frames[index].camera for index in density],
                           _encode_views(frameset, density, bound), config.sampler.z_near, config.sampler.z_far,
                           config.head_size)
    views = [RenderView(frameset.frames[index].image, frameset.frames[index].camera) for index in frameset.render]
    # every patch picks its own loss view
    choices = rng.integers(0, len(frameset.loss), size=config.patches_per_item)
    colors, depths, targets = [], [], []
    for choice in np.unique(choices):
        frame = frameset.frames[frameset.loss[choice]]
        height, width = frame.image.shape[:2]
        corners = sample_patch_corners(rng, height, width, config.patch_size, int(np.sum(choices == choice)))
        rendered = render_patches(field, frame.camera, corners, config.patch_size, views, config.sampler, rng)
        colors.append(rendered.colors)
        depths.append(rendered.filled_depth)
        targets.append(gather_patches(frame.image, corners, config.patch_size))
    batch = PatchBatch(np.concatenate(targets), ops.concat(colors, axis=1), ops.concat(depths, axis=0))
    return total_loss(batch, config.loss)


def _kd_item_loss(frameset: FrameSet, bound, config: TrainConfig,
                  rng: np.random.Generator) -> typing.Optional[Tensor]:
    density = frameset.density
    cameras = [frameset.frames[index].camera for index in density]
    feature_maps = _encode_views(frameset, density, bound)
    teacher = MultiViewField(bound, cameras, feature_maps, config.sampler.z_near, config.sampler.z_far,
                             config.head_size)
    position = int(rng.integers(0, len(density)))
    student = SingleViewField(bound, cameras[position], feature_maps[position], config.sampler.z_near,
                              config.sampler.z_far)
    # the student view's own rays, sampled the way stage one renders them
    camera = cameras[position]
    corners = sample_patch_corners(rng, camera.height, camera.width, config.patch_size, config.patches_per_item)
    origins, directions = rays_through_pixels(camera, patch_pixels(corners, config.patch_size).reshape(-1, 2))
    points = sample_rays_points(origins, directions, config.sampler, rng).points.reshape(-1, 3)
    points = points[student.visible(points)]
    if not len(points):
        return None
    return kd_loss(teacher(points), student(points))


def _step(checkpoint: Checkpoint, batch: typing.Sequence[FrameSet], config: TrainConfig, rng: np.random.Generator,
          item_loss) -> typing.Tuple[Checkpoint, float]:
    if not batch:
        raise DensFieldContractViolation("a training step needs at least one frameset")
    with Graph() as graph:
        bound = checkpoint.params.bind(graph)
        item_losses = [item_loss(_prepare(frameset, config, rng), bound, config, rng) for frameset in batch]
        losses = [loss for loss in item_losses if loss is not None]
        if not losses:
            raise DensFieldContractViolation("no frameset of the batch produced a loss")
        loss = ops.reduce_mean(ops.concat([ops.reshape(item, (1,)) for item in losses]))
    grads = backward(graph, loss)
    lr = learning_rate(config, checkpoint.stage, checkpoint.step)
    params, adam = adam_step(checkpoint.params, grads, checkpoint.adam, lr)
    return checkpoint._replace(params=params, adam=adam, step=checkpoint.step + 1), loss.item()


def train_step_mv(checkpoint: Checkpoint, batch: typing.Sequence[FrameSet], config: TrainConfig,
                  rng: np.random.Generator) -> typing.Tuple[Checkpoint, float]:
    """Stage one step: photometric plus smoothness loss, backbone and phi_MV updated

    Args:
        checkpoint: stage mv state, phi_SV frozen
        batch: framesets, each augmented and view dropped independently
        config: batch geometry, augmentation, loss weights and schedule
        rng: the only source of randomness, the step is a pure function of its inputs

    Returns:
        the next state and the batch loss
    """
    if checkpoint.stage != STAGE_MV:
        raise DensFieldContractViolation("train_step_mv needs an mv checkpoint, got '{}'".format(checkpoint.stage))
    unfrozen = [name for name in checkpoint.params.trainable_names() if name.startswith(SV_HEAD_PREFIX)]
    if unfrozen:
        raise DensFieldContractViolation("phi_SV must stay frozen during stage one, '{}' is trainable".format(
            unfrozen[0]))
    return _step(checkpoint, batch, config, rng, _mv_item_loss)


def train_step_kd(checkpoint: Checkpoint, batch: typing.Sequence[FrameSet], config: TrainConfig,
                  rng: np.random.Generator) -> typing.Tuple[Checkpoint, float]:
    """Stage two step: phi_SV fitted to the frozen phi_MV on the student view's ray samples"""
    if checkpoint.stage != STAGE_KD:
        raise DensFieldContractViolation("train_step_kd needs a kd checkpoint, got '{}'".format(checkpoint.stage))
    checkpoint.check()
    return _step(checkpoint, batch, config, rng, _kd_item_loss)


def kd_validation_loss(checkpoint: Checkpoint, framesets: typing.Sequence[FrameSet], config: TrainConfig,
                       seed: int = 0) -> float:
    """Mean distillation loss over framesets without augmentation or gradients"""
    rng = np.random.default_rng(seed)
    plain = replace(config, color_jitter=False, flip=False)
    bound = checkpoint.params.bind()
    losses = [_kd_item_loss(frameset, bound, plain, rng) for frameset in framesets]
    values = [loss.item() for loss in losses if loss is not None]
    if not values:
        raise DensFieldContractViolation("no frameset produced a distillation loss")
    return float(np.mean(values))
