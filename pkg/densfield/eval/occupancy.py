"""Occupancy prediction on the evaluation grid for every inference arrangement

Modes:
    sv        phi_MV given the reference frame alone, the single view arrangement of the trained model
    mv-1view  phi_MV on the reference frame alone
    mv-nview  phi_MV on the first n frames (n = eval_views, the reference stereo pair for n = 2)
    kd        phi_SV of a distilled checkpoint
    gt        the ground truth density, for validating the harness
"""
import logging
import re
import typing
from dataclasses import dataclass, field

import numpy as np

from densfield.core.constants import EVAL_MODES, STAGE_KD
from densfield.core.exceptions import DensFieldContractViolation
from densfield.geometry import CameraModel, SamplerConfig
from densfield.models import ConstantField, MultiViewField, SingleViewField, encode, evaluate_field
from densfield.synthetic.dataset import SceneRecord
from densfield.synthetic.frames import FrameSet
from densfield.synthetic.grids import GridSpec
from densfield.synthetic.oracle import gt_density, observed
from densfield.synthetic.scene import SceneGT
from densfield.train.checkpoint import Checkpoint

logger = logging.getLogger(__name__)

_NVIEW = re.compile(r'^mv-(\d+)view$')


@dataclass(frozen=True)
class EvalConfig:
    grid: GridSpec
    tau_occ: float = 0.0  # 0 picks the grid's default threshold
    eval_views: int = 2
    depth_bins: int = 10
    head_size: str = 'middle'
    gt_step: float = 0.05
    gt_far: float = 60.0
    sampler: SamplerConfig = field(default_factory=SamplerConfig)

    def __post_init__(self):
        if self.tau_occ < 0.0:
            raise DensFieldContractViolation("tau_occ must be non negative, got {}".format(self.tau_occ))
        if self.eval_views < 1:
            raise DensFieldContractViolation("eval_views must be positive, got {}".format(self.eval_views))

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'EvalConfig':
        return cls(GridSpec.from_settings(settings), settings['tau_occ'], settings['eval_views'],
                   settings['depth_bins'], settings['head_size'], settings['gt_step'], settings['gt_far'],
                   SamplerConfig.from_settings(settings))

    @property
    def threshold(self) -> float:
        return self.tau_occ or self.grid.default_threshold()


def resolve_mode(mode: str, eval_views: int = 2) -> typing.Tuple[str, int]:
    """Canonical mode and view count, 'mv-<n>view' spells mv-nview with n views

    >>> resolve_mode('mv-3view'), resolve_mode('mv-nview', 2), resolve_mode('sv')
    (('mv-nview', 3), ('mv-nview', 2), ('sv', 1))
    """
    match = _NVIEW.match(mode)
    if match and int(match.group(1)) > 1:
        return 'mv-nview', int(match.group(1))
    if mode not in EVAL_MODES:
        raise DensFieldContractViolation("unknown evaluation mode '{}', expected one of {} or mv-<n>view".format(
            mode, EVAL_MODES))
    return mode, eval_views if mode == 'mv-nview' else 1


def mode_label(mode: str, eval_views: int = 2) -> str:
    """Report row name of a mode

    >>> mode_label('mv-nview', 2)
    'mv-2view'
    """
    mode, n_views = resolve_mode(mode, eval_views)
    return 'mv-{}view'.format(n_views) if mode == 'mv-nview' else mode


def inference_indices(frameset: FrameSet, mode: str, eval_views: int = 2) -> typing.Tuple[int, ...]:
    """Frames a mode reads, the reference frame first"""
    _, n_views = resolve_mode(mode, eval_views)
    if n_views > len(frameset.frames):
        raise DensFieldContractViolation("{} needs {} frames, the frameset has {}".format(
            mode, n_views, len(frameset.frames)))
    return tuple(range(n_views))


def build_field(checkpoint: typing.Optional[Checkpoint], frameset: FrameSet, mode: str, config: EvalConfig,
                scene: typing.Optional[SceneGT] = None) -> typing.Tuple[typing.Callable, typing.List[CameraModel]]:
    """The density field a mode queries and the cameras it infers from, evaluated without gradients"""
    canonical, _ = resolve_mode(mode, config.eval_views)
    indices = inference_indices(frameset, mode, config.eval_views)
    cameras = [frameset.frames[index].camera for index in indices]
    if canonical == 'gt':
        if scene is None:
            raise DensFieldContractViolation("the gt mode needs the scene")
        return ConstantField(lambda points: gt_density(scene, points)), cameras
    if checkpoint is None:
        raise DensFieldContractViolation("mode '{}' needs a checkpoint".format(mode))
    if canonical == 'kd' and checkpoint.stage != STAGE_KD:
        raise DensFieldContractViolation("mode kd needs a distilled checkpoint, got stage '{}'".format(
            checkpoint.stage))
    bound = checkpoint.params.bind()
    feature_maps = [encode(frameset.frames[index].image, bound) for index in indices]
    sampler = config.sampler
    if canonical == 'kd':
        return SingleViewField(bound, cameras[0], feature_maps[0], sampler.z_near, sampler.z_far), cameras
    return MultiViewField(bound, cameras, feature_maps, sampler.z_near, sampler.z_far, config.head_size), cameras


class OccupancyPrediction(typing.NamedTuple):
    bits: np.ndarray  # (nx, ny, nz) sigma >= tau
    sigma: np.ndarray  # (nx, ny, nz)


def predict_occupancy_grid(checkpoint: typing.Optional[Checkpoint], frameset: FrameSet, config: EvalConfig,
                           mode: str = 'mv-1view', scene: typing.Optional[SceneGT] = None) -> OccupancyPrediction:
    """Query a mode's field at every cell center of the evaluation grid and threshold it

    Args:
        checkpoint: trained state, unused by the gt mode
        frameset: supplies the inference frames
        config: grid, threshold and view count
        mode: one of EVAL_MODES or mv-<n>view
        scene: required by the gt mode

    Returns:
        occupancy bits and the densities they were thresholded from
    """
    density_field, _ = build_field(checkpoint, frameset, mode, config, scene)
    grid = config.grid
    sigma = evaluate_field(density_field, grid.cell_centers().reshape(-1, 3)).reshape(grid.resolution)
    return OccupancyPrediction(sigma >= config.threshold, sigma)


class OccupancyEval(typing.NamedTuple):
    """The three grids one evaluation compares"""
    grid: GridSpec
    predicted: np.ndarray
    truth: np.ndarray
    visible: np.ndarray
    sigma: np.ndarray

    def check(self) -> None:
        shapes = {self.predicted.shape, self.truth.shape, self.visible.shape, self.grid.resolution}
        if len(shapes) != 1:
            raise DensFieldContractViolation("evaluation grids disagree in shape: {}".format(sorted(shapes)))


def evaluate_record(checkpoint: typing.Optional[Checkpoint], record: SceneRecord, mode: str,
                    config: EvalConfig) -> OccupancyEval:
    """Prediction, ground truth and the visibility of the mode's inference cameras for one scene"""
    if record.grid != config.grid:
        raise DensFieldContractViolation("dataset grid {} differs from the evaluation grid {}".format(
            record.grid, config.grid))
    prediction = predict_occupancy_grid(checkpoint, record.frameset, config, mode, record.scene)
    indices = inference_indices(record.frameset, mode, config.eval_views)
    if len(indices) == 1:
        visible = record.visibility
    else:
        cameras = [record.frameset.frames[index].camera for index in indices]
        visible = observed(record.scene, cameras, config.grid.cell_centers())
    result = OccupancyEval(config.grid, prediction.bits, record.occupancy, visible, prediction.sigma)
    result.check()
    return result
