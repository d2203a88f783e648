"""The desk scale experiment: generate, train, distill and compare the inference arrangements

Runs for tens of CPU minutes at the default settings. Prints, per claim:
    the share of test scenes where two views beat one view on O_acc
    the held-out distillation loss after distillation relative to its start
    the single view O_acc of the distilled head against the multi view head given one view
"""
import logging
import sys
import tempfile
import typing
from pathlib import Path
from time import time

import numpy as np

from densfield.core.config import resolve_settings, write_snapshot
from densfield.eval import EvalConfig, evaluate_record, occupancy_metrics
from densfield.eval.metrics import triplet
from densfield.synthetic import generate_split, write_dataset
from densfield.train import TrainConfig, kd_validation_loss, run_training, start_distillation, load_checkpoint

logger = logging.getLogger(__name__)


class Timer:
    """Adopted from https://blog.usejournal.com/how-to-create-your-own-timing-context-manager-in-python-a0e944b48cf8"""

    def __init__(self, description):
        self.description = description
        self.start = None
        self.end = None

    def __enter__(self):
        self.start = time()

    def __exit__(self, *args):
        self.end = time()
        logger.info("%s: %.1fs", self.description, self.end - self.start)


def _scene_accuracy(checkpoint, records, mode: str, config: EvalConfig) -> np.ndarray:
    accuracies = []
    for record in records:
        result = evaluate_record(checkpoint, record, mode, config)
        accuracies.append(triplet(occupancy_metrics(result.predicted, result.truth, result.visible).occupancy)[0])
    return np.array(accuracies)


def main(out_dir: typing.Optional[str] = None, overrides: typing.Sequence[str] = ()) -> typing.Dict[str, float]:
    """Run the experiment below out_dir (a temporary directory by default) and return its summary numbers"""
    logging.basicConfig(level=logging.INFO, format='%(asctime)s %(levelname)s %(name)s: %(message)s')
    root = Path(out_dir or tempfile.mkdtemp(prefix='densfield_desk_'))
    settings = resolve_settings(overrides=overrides)
    write_snapshot(root / 'resolved.cfg', settings)
    with Timer("generating datasets"):
        train = generate_split(settings['seed'], 'train', settings['n_scenes'], settings)
        test = generate_split(settings['seed'], 'test', settings['n_test_scenes'], settings)
        write_dataset(root / 'train', train)
    with Timer("stage one"):
        teacher = run_training(root / 'train', settings, 'mv', root / 'run')
    config = TrainConfig.from_settings(settings)
    test_framesets = [record.frameset for record in test]
    initial_kd = kd_validation_loss(start_distillation(load_checkpoint(teacher.checkpoint_path), settings),
                                    test_framesets, config)
    with Timer("distillation"):
        student = run_training(root / 'train', settings, 'kd', root / 'run', init_checkpoint=teacher.checkpoint_path)
    final_kd = kd_validation_loss(student.checkpoint, test_framesets, config)
    eval_config = EvalConfig.from_settings(settings)
    with Timer("evaluation"):
        one_view = _scene_accuracy(teacher.checkpoint, test, 'mv-1view', eval_config)
        two_views = _scene_accuracy(teacher.checkpoint, test, 'mv-nview', eval_config)
        distilled = _scene_accuracy(student.checkpoint, test, 'kd', eval_config)
    summary = {
        'two_views_win_share': float(np.mean(two_views >= one_view)),
        'kd_loss_ratio': final_kd / initial_kd if initial_kd else float('nan'),
        'kd_minus_mv_single_view_O_acc': float(np.mean(distilled) - np.mean(one_view)),
    }
    for key, value in summary.items():
        print("{}: {:.4f}".format(key, value))
    return summary


if __name__ == "__main__":
    main(overrides=sys.argv[1:])
