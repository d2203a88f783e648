"""Depth maps of the reference view and their comparison to the ground truth"""
import typing

import numpy as np

from densfield.eval.metrics import DepthMetrics, depth_metrics
from densfield.eval.occupancy import EvalConfig, build_field
from densfield.render import render_depth_map
from densfield.synthetic.dataset import SceneRecord
from densfield.synthetic.frames import FrameSet
from densfield.synthetic.oracle import render_gt_depth
from densfield.synthetic.scene import SceneGT
from densfield.train.checkpoint import Checkpoint


def predict_depth_map(checkpoint: typing.Optional[Checkpoint], frameset: FrameSet, config: EvalConfig,
                      mode: str = 'mv-1view', scene: typing.Optional[SceneGT] = None) -> np.ndarray:
    """(H, W) filled depth of the reference view rendered through a mode's field"""
    density_field, cameras = build_field(checkpoint, frameset, mode, config, scene)
    _, filled = render_depth_map(density_field, cameras[0], config.sampler)
    return filled


def evaluate_depth(checkpoint: typing.Optional[Checkpoint], record: SceneRecord, mode: str,
                   config: EvalConfig) -> DepthMetrics:
    """Depth metrics of the reference view over the pixels whose ground truth ray hits a surface"""
    predicted = predict_depth_map(checkpoint, record.frameset, config, mode, record.scene)
    truth, valid = render_gt_depth(record.scene, record.frameset.frames[0].camera, config.gt_step, config.gt_far)
    return depth_metrics(predicted, truth, valid & (truth > 0.0))
