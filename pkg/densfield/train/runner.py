"""Training runs: read a dataset, step one stage to completion, write checkpoints and a loss log"""
import csv
import io
import logging
import typing
from pathlib import Path

import numpy as np

from densfield.core.config import Settings
from densfield.core.constants import STAGE_KD, STAGE_MV, STAGES
from densfield.core.exceptions import DensFieldContractViolation, DensFieldIOError
from densfield.synthetic.dataset import read_dataset
from densfield.synthetic.frames import FrameSet
from densfield.train.checkpoint import Checkpoint, load_checkpoint, new_checkpoint, save_checkpoint, \
    start_distillation
from densfield.train.steps import TrainConfig, learning_rate, train_step_kd, train_step_mv

logger = logging.getLogger(__name__)

LOSS_LOG_HEADER = ('step', 'loss', 'lr')

STAGE_TO_STEP = {
    STAGE_MV: train_step_mv,
    STAGE_KD: train_step_kd,
}  # type: typing.Dict[str, typing.Callable]


class TrainingResult(typing.NamedTuple):
    checkpoint: Checkpoint
    checkpoint_path: Path
    loss_log_path: Path
    losses: typing.List[float]


def checkpoint_steps(n_steps: int, fraction: float) -> typing.List[int]:
    """Completed step counts after which an intermediate checkpoint is written

    >>> checkpoint_steps(20, 0.1)
    [2, 4, 6, 8, 10, 12, 14, 16, 18, 20]
    """
    interval = max(1, int(round(n_steps * fraction)))
    return list(range(interval, n_steps + 1, interval))


def format_loss_log(rows: typing.Iterable[typing.Tuple[int, float, float]]) -> str:
    """CSV text of (step, loss, lr) rows

    >>> format_loss_log([(0, 0.5, 0.0001)])
    'step,loss,lr\\n0,0.5,0.0001\\n'
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(LOSS_LOG_HEADER)
    writer.writerows((step, repr(float(loss)), repr(float(lr))) for step, loss, lr in rows)
    return buffer.getvalue()


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(text.encode('utf-8'))
    except OSError as err:
        raise DensFieldIOError("could not write {}: {}".format(path, err)) from err


def _initial_checkpoint(stage: str, settings: Settings, init_checkpoint) -> Checkpoint:
    if stage == STAGE_MV:
        return new_checkpoint(settings)
    if init_checkpoint is None:
        raise DensFieldContractViolation("distillation starts from a trained mv checkpoint, none given")
    teacher = load_checkpoint(init_checkpoint)
    if teacher.stage != STAGE_MV:
        raise DensFieldContractViolation("distillation needs an mv checkpoint, {} holds stage '{}'".format(
            init_checkpoint, teacher.stage))
    return start_distillation(teacher, settings)


def train_framesets(framesets: typing.Sequence[FrameSet], settings: Settings, stage: str, out_dir,
                    init_checkpoint=None) -> TrainingResult:
    """Run one stage on in-memory framesets

    Args:
        framesets: training items, batches are drawn from them uniformly with replacement
        settings: resolved settings, seed and training keys are read from it
        stage: 'mv' or 'kd'
        out_dir: receives checkpoint_<step>.dfld, <stage>.dfld and loss_<stage>.csv
        init_checkpoint: path of the mv checkpoint distillation starts from

    Returns:
        the final state and where it was written
    """
    try:
        step_function = STAGE_TO_STEP[stage]
    except KeyError as err:
        raise DensFieldContractViolation("stage must be one of {}, got '{}'".format(STAGES, stage)) from err
    if not framesets:
        raise DensFieldContractViolation("training needs at least one frameset")
    config = TrainConfig.from_settings(settings)
    out_dir = Path(out_dir)
    checkpoint = _initial_checkpoint(stage, settings, init_checkpoint)
    rng = np.random.default_rng(np.random.SeedSequence([settings['seed'], STAGES.index(stage)]))
    n_steps = config.steps(stage)
    save_at = set(checkpoint_steps(n_steps, config.checkpoint_fraction))
    rows = []  # type: typing.List[typing.Tuple[int, float, float]]
    losses = []  # type: typing.List[float]
    logger.info("training stage %s for %d steps on %d framesets", stage, n_steps, len(framesets))
    for step in range(n_steps):
        lr = learning_rate(config, stage, checkpoint.step)
        batch = [framesets[index] for index in rng.integers(0, len(framesets), size=config.batch_size)]
        checkpoint, loss = step_function(checkpoint, batch, config, rng)
        rows.append((step, loss, lr))
        losses.append(loss)
        if config.log_every and (step + 1) % config.log_every == 0:
            logger.info("stage %s step %d loss %.6f lr %g", stage, step + 1, loss, lr)
        if step + 1 in save_at:
            save_checkpoint(out_dir / 'checkpoint_{}_{:06d}.dfld'.format(stage, step + 1), checkpoint)
    checkpoint_path = out_dir / '{}.dfld'.format(stage)
    save_checkpoint(checkpoint_path, checkpoint)
    loss_log_path = out_dir / 'loss_{}.csv'.format(stage)
    _write_text(loss_log_path, format_loss_log(rows))
    logger.info("stage %s done, parameters %s", stage, checkpoint.digest())
    return TrainingResult(checkpoint, checkpoint_path, loss_log_path, losses)


def run_training(dataset_path, settings: Settings, stage: str, out_dir, init_checkpoint=None) -> TrainingResult:
    """train_framesets on the framesets of a dataset written by write_dataset"""
    records = read_dataset(dataset_path)
    return train_framesets([record.frameset for record in records], settings, stage, out_dir, init_checkpoint)
