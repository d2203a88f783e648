"""Occupancy and depth metrics, and the CSV files they are reported in"""
import logging
import typing
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from densfield.core.constants import REPORT_COLUMNS
from densfield.core.exceptions import DensFieldContractViolation, DensFieldIOError
from densfield.synthetic.grids import GridSpec

logger = logging.getLogger(__name__)

NAN = float('nan')


class Confusion(typing.NamedTuple):
    """Confusion counts of a binary prediction"""
    tp: int
    fp: int
    fn: int
    tn: int

    def merged(self, other: 'Confusion') -> 'Confusion':
        return Confusion(*(mine + theirs for mine, theirs in zip(self, other)))

    @property
    def total(self) -> int:
        return sum(self)


def confusion_counts(predicted: np.ndarray, truth: np.ndarray) -> Confusion:
    """Counts of a prediction against the truth, True is the positive class

    >>> confusion_counts(np.array([True, True, False, False]), np.array([True, False, True, False]))
    Confusion(tp=1, fp=1, fn=1, tn=1)
    """
    predicted, truth = np.asarray(predicted, dtype=bool), np.asarray(truth, dtype=bool)
    return Confusion(int(np.count_nonzero(predicted & truth)), int(np.count_nonzero(predicted & ~truth)),
                     int(np.count_nonzero(~predicted & truth)), int(np.count_nonzero(~predicted & ~truth)))


def _ratio(numerator: int, denominator: int, name: str) -> float:
    if denominator == 0:
        logger.warning("%s has an empty denominator, reported as nan", name)
        return NAN
    return numerator / denominator


def triplet(counts: Confusion, name: str = 'metric') -> typing.Tuple[float, float, float]:
    """(accuracy, precision, recall) of confusion counts, nan where a denominator is empty"""
    return (_ratio(counts.tp + counts.tn, counts.total, name + ' accuracy'),
            _ratio(counts.tp, counts.tp + counts.fp, name + ' precision'),
            _ratio(counts.tp, counts.tp + counts.fn, name + ' recall'))


class DepthMetrics(typing.NamedTuple):
    abs_rel: float
    rmse: float
    delta125: float
    n_pixels: int


def depth_metrics(predicted: np.ndarray, truth: np.ndarray, mask: np.ndarray) -> DepthMetrics:
    """AbsRel, RMSE and the fraction of pixels within a factor 1.25, over the masked pixels

    >>> round(depth_metrics(np.array([1.3, 2.6]), np.array([1.0, 2.0]), np.array([True, True])).abs_rel, 6)
    0.3
    """
    predicted, truth = np.asarray(predicted, dtype=np.float64), np.asarray(truth, dtype=np.float64)
    mask = np.asarray(mask, dtype=bool)
    if not predicted.shape == truth.shape == mask.shape:
        raise DensFieldContractViolation("depth_metrics got prediction {}, truth {} and mask {}".format(
            predicted.shape, truth.shape, mask.shape))
    if not mask.any():
        raise DensFieldContractViolation("depth_metrics needs at least one valid pixel")
    predicted, truth = predicted[mask], truth[mask]
    if np.any(truth <= 0.0) or np.any(predicted <= 0.0):
        raise DensFieldContractViolation("depths must be positive on the mask")
    ratio = np.maximum(predicted / truth, truth / predicted)
    return DepthMetrics(float(np.mean(np.abs(predicted - truth) / truth)),
                        float(np.sqrt(np.mean((predicted - truth) ** 2))), float(np.mean(ratio < 1.25)),
                        int(mask.sum()))


def merge_depth(metrics: typing.Sequence[DepthMetrics]) -> DepthMetrics:
    """Pool per image metrics as if computed over all their pixels at once"""
    counts = np.array([item.n_pixels for item in metrics], dtype=np.float64)
    if not counts.sum():
        raise DensFieldContractViolation("no depth metrics to merge")
    weights = counts / counts.sum()
    return DepthMetrics(float(np.dot(weights, [item.abs_rel for item in metrics])),
                        float(np.sqrt(np.dot(weights, [item.rmse ** 2 for item in metrics]))),
                        float(np.dot(weights, [item.delta125 for item in metrics])), int(counts.sum()))


@dataclass(frozen=True)
class MetricsReport:
    """One row of the report: occupancy triplets from their counts, optionally depth metrics"""
    mode: str
    occupancy: Confusion
    invisible_empty: Confusion
    depth: typing.Optional[DepthMetrics] = None

    def merged(self, other: 'MetricsReport') -> 'MetricsReport':
        if other.mode != self.mode:
            raise DensFieldContractViolation("can not merge reports of modes '{}' and '{}'".format(
                self.mode, other.mode))
        depth = self.depth
        if depth is None or other.depth is None:
            depth = depth or other.depth
        else:
            depth = merge_depth([depth, other.depth])
        return MetricsReport(self.mode, self.occupancy.merged(other.occupancy),
                             self.invisible_empty.merged(other.invisible_empty), depth)

    def with_depth(self, depth: DepthMetrics) -> 'MetricsReport':
        return replace(self, depth=depth)

    def values(self) -> typing.Tuple[float, ...]:
        """The nine numbers of a report row, in REPORT_COLUMNS order"""
        depth = (self.depth.abs_rel, self.depth.rmse, self.depth.delta125) if self.depth else (NAN, NAN, NAN)
        return triplet(self.occupancy, 'O') + triplet(self.invisible_empty, 'IE') + depth


def empty_report(mode: str) -> MetricsReport:
    return MetricsReport(mode, Confusion(0, 0, 0, 0), Confusion(0, 0, 0, 0))


def occupancy_metrics(predicted: np.ndarray, truth: np.ndarray, visible: np.ndarray,
                      mode: str = '') -> MetricsReport:
    """Occupancy over every cell, and recovery of empty space over the invisible cells

    Args:
        predicted: predicted occupancy bits
        truth: ground truth occupancy bits
        visible: cells seen by the inference cameras
        mode: label of the report row

    Returns:
        O counts with occupied as the positive class, IE counts over invisible cells with empty as the positive class
    """
    predicted, truth, visible = (np.asarray(bits, dtype=bool) for bits in (predicted, truth, visible))
    if not predicted.shape == truth.shape == visible.shape:
        raise DensFieldContractViolation("occupancy_metrics got grids of shape {}, {} and {}".format(
            predicted.shape, truth.shape, visible.shape))
    hidden = ~visible
    return MetricsReport(mode, confusion_counts(predicted, truth),
                         confusion_counts(~predicted[hidden], ~truth[hidden]))


def _write_csv_text(path, text: str) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode('utf-8'))
    except OSError as err:
        raise DensFieldIOError("could not write {}: {}".format(path, err)) from err


def format_report(reports: typing.Sequence[MetricsReport]) -> str:
    """CSV text, one row per report with 6 decimals

    >>> print(format_report([MetricsReport('gt', Confusion(1, 0, 0, 1), Confusion(1, 0, 0, 0))]), end='')
    mode,O_acc,O_prec,O_rec,IE_acc,IE_prec,IE_rec,AbsRel,RMSE,delta125
    gt,1.000000,1.000000,1.000000,1.000000,1.000000,1.000000,nan,nan,nan
    """
    if not reports:
        raise DensFieldContractViolation("a report needs at least one row")
    lines = [','.join(REPORT_COLUMNS)]
    lines.extend(','.join([report.mode] + ['{:.6f}'.format(value) for value in report.values()])
                 for report in reports)
    return '\n'.join(lines) + '\n'


def write_report(reports: typing.Sequence[MetricsReport], path) -> None:
    _write_csv_text(path, format_report(reports))
    for report in reports:
        logger.info("%s: %s", report.mode, ' '.join('{}={:.4f}'.format(column, value)
                                                    for column, value in zip(REPORT_COLUMNS[1:], report.values())))


class DepthBin(typing.NamedTuple):
    z_min: float
    z_max: float
    correct: int
    cells: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.cells if self.cells else NAN


def occupancy_accuracy_by_depth(predicted: np.ndarray, truth: np.ndarray, grid: GridSpec,
                                n_bins: int) -> typing.List[DepthBin]:
    """Occupancy accuracy of the cells in n_bins equal slabs along z, binned by cell center"""
    predicted, truth = np.asarray(predicted, dtype=bool), np.asarray(truth, dtype=bool)
    if predicted.shape != grid.resolution or truth.shape != grid.resolution:
        raise DensFieldContractViolation("grids {} and {} do not match resolution {}".format(
            predicted.shape, truth.shape, grid.resolution))
    if n_bins < 1:
        raise DensFieldContractViolation("need at least one depth bin, got {}".format(n_bins))
    edges = np.linspace(grid.low[2], grid.high[2], n_bins + 1)
    slabs = np.clip(np.searchsorted(edges, grid.axis_centers(2), side='right') - 1, 0, n_bins - 1)
    correct = (predicted == truth).sum(axis=(0, 1))
    cells_per_slice = grid.resolution[0] * grid.resolution[1]
    return [DepthBin(float(edges[index]), float(edges[index + 1]), int(correct[slabs == index].sum()),
                     int(np.count_nonzero(slabs == index)) * cells_per_slice) for index in range(n_bins)]


def merge_depth_bins(first: typing.Sequence[DepthBin], second: typing.Sequence[DepthBin]) -> typing.List[DepthBin]:
    if [(a.z_min, a.z_max) for a in first] != [(b.z_min, b.z_max) for b in second]:
        raise DensFieldContractViolation("depth bins differ")
    return [a._replace(correct=a.correct + b.correct, cells=a.cells + b.cells) for a, b in zip(first, second)]


def format_depth_bins(bins: typing.Sequence[DepthBin]) -> str:
    """CSV text ``z_min,z_max,O_acc,cells``

    >>> print(format_depth_bins([DepthBin(3.0, 5.0, 3, 4)]), end='')
    z_min,z_max,O_acc,cells
    3.000000,5.000000,0.750000,4
    """
    lines = ['z_min,z_max,O_acc,cells']
    lines.extend('{:.6f},{:.6f},{:.6f},{:d}'.format(item.z_min, item.z_max, item.accuracy, item.cells)
                 for item in bins)
    return '\n'.join(lines) + '\n'


def write_depth_bins(bins: typing.Sequence[DepthBin], path) -> None:
    _write_csv_text(path, format_depth_bins(bins))
