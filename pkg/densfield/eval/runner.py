"""Evaluation runs over a test dataset: report rows per mode, accuracy by depth and profiles"""
import logging
import typing
from pathlib import Path

from densfield.core.config import Settings
from densfield.core.exceptions import DensFieldContractViolation
from densfield.eval.depth import evaluate_depth
from densfield.eval.metrics import DepthBin, MetricsReport, empty_report, merge_depth, merge_depth_bins, \
    occupancy_accuracy_by_depth, occupancy_metrics, write_depth_bins, write_report
from densfield.eval.occupancy import EvalConfig, evaluate_record, mode_label, predict_occupancy_grid
from densfield.eval.profile import render_profile
from densfield.synthetic.dataset import SceneRecord, read_dataset
from densfield.train.checkpoint import Checkpoint, load_checkpoint

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.csv'


class ModeEvaluation(typing.NamedTuple):
    report: MetricsReport  # pooled over every scene
    scenes: typing.List[MetricsReport]
    depth_bins: typing.List[DepthBin]


def evaluate_occupancy(checkpoint: typing.Optional[Checkpoint], records: typing.Sequence[SceneRecord], mode: str,
                       config: EvalConfig) -> ModeEvaluation:
    """Occupancy counts of every scene and their pooled report"""
    if not records:
        raise DensFieldContractViolation("evaluation needs at least one scene")
    label = mode_label(mode, config.eval_views)
    report = empty_report(label)
    scenes = []
    bins = []  # type: typing.List[DepthBin]
    for record in records:
        result = evaluate_record(checkpoint, record, mode, config)
        scene_report = occupancy_metrics(result.predicted, result.truth, result.visible, label)
        scenes.append(scene_report)
        report = report.merged(scene_report)
        scene_bins = occupancy_accuracy_by_depth(result.predicted, result.truth, config.grid, config.depth_bins)
        bins = merge_depth_bins(bins, scene_bins) if bins else scene_bins
    return ModeEvaluation(report, scenes, bins)


def evaluate_depth_dataset(checkpoint: typing.Optional[Checkpoint], records: typing.Sequence[SceneRecord],
                           mode: str, config: EvalConfig) -> MetricsReport:
    """Report row holding only the pooled depth metrics of the reference views"""
    if not records:
        raise DensFieldContractViolation("evaluation needs at least one scene")
    depth = merge_depth([evaluate_depth(checkpoint, record, mode, config) for record in records])
    return empty_report(mode_label(mode, config.eval_views)).with_depth(depth)


def _load(checkpoint_path) -> typing.Optional[Checkpoint]:
    return None if checkpoint_path is None else load_checkpoint(checkpoint_path)


def run_occupancy_evaluation(checkpoint_path, dataset_path, modes: typing.Sequence[str], settings: Settings,
                             out_dir, with_depth: bool = False) -> typing.List[MetricsReport]:
    """Evaluate every mode and write report.csv plus accuracy_by_depth_<mode>.csv

    Args:
        checkpoint_path: checkpoint to evaluate, may be None when only the gt mode runs
        dataset_path: test dataset written by write_dataset
        modes: rows of the report, in order
        settings: resolved settings, the evaluation keys are read from it
        out_dir: receives the CSV files
        with_depth: also fill in the depth columns

    Returns:
        one pooled report per mode
    """
    config = EvalConfig.from_settings(settings)
    checkpoint = _load(checkpoint_path)
    records = read_dataset(dataset_path)
    out_dir = Path(out_dir)
    reports = []
    for mode in modes:
        evaluation = evaluate_occupancy(checkpoint, records, mode, config)
        report = evaluation.report
        if with_depth:
            report = report.with_depth(evaluate_depth_dataset(checkpoint, records, mode, config).depth)
        reports.append(report)
        write_depth_bins(evaluation.depth_bins, out_dir / 'accuracy_by_depth_{}.csv'.format(report.mode))
    write_report(reports, out_dir / REPORT_FILE)
    return reports


def run_depth_evaluation(checkpoint_path, dataset_path, modes: typing.Sequence[str], settings: Settings,
                         out_dir) -> typing.List[MetricsReport]:
    """Depth columns only, written to report.csv"""
    config = EvalConfig.from_settings(settings)
    checkpoint = _load(checkpoint_path)
    records = read_dataset(dataset_path)
    reports = [evaluate_depth_dataset(checkpoint, records, mode, config) for mode in modes]
    write_report(reports, Path(out_dir) / REPORT_FILE)
    return reports


def run_profiles(checkpoint_path, dataset_path, mode: str, settings: Settings, out_dir,
                 scenes: typing.Optional[typing.Sequence[int]] = None) -> typing.List[Path]:
    """profile_<scene>_<mode>.ppm for the chosen scenes (all by default) plus their ground truth profiles"""
    config = EvalConfig.from_settings(settings)
    checkpoint = _load(checkpoint_path)
    records = read_dataset(dataset_path)
    out_dir = Path(out_dir)
    indices = range(len(records)) if scenes is None else scenes
    paths = []
    for index in indices:
        if not 0 <= index < len(records):
            raise DensFieldContractViolation("scene {} is not in a dataset of {} scenes".format(index, len(records)))
        record = records[index]
        for name in dict.fromkeys((mode, 'gt')):
            sigma = predict_occupancy_grid(checkpoint, record.frameset, config, name, record.scene).sigma
            path = out_dir / 'profile_{:04d}_{}.ppm'.format(index, mode_label(name, config.eval_views))
            render_profile(sigma, config.grid, path)
            paths.append(path)
    return paths
