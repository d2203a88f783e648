"""Training state and its DFLD1 file form

The optimizer moments travel inside the checkpoint as parameters under reserved prefixes, everything else (stage,
step, learning rate and the settings of the run) goes in to the metadata block.
"""
import logging
import typing
from collections import OrderedDict

import numpy as np

from densfield.core.config import Settings, default_settings, parse_setting
from densfield.core.constants import ADAM_FIRST_MOMENT_PREFIX, ADAM_SECOND_MOMENT_PREFIX, ADAM_STEP_PATH, \
    BACKBONE_PREFIX, MV_HEAD_PREFIX, SV_HEAD_PREFIX, STAGE_MV, STAGE_KD, STAGES
from densfield.core.exceptions import DensFieldContractViolation, DensFieldParseError
from densfield.models import build_params
from densfield.tensor import ParamSet, AdamState
from densfield.tensor.serialization import read_checkpoint_file, write_checkpoint_file
from densfield.tools.checksum import params_digest

logger = logging.getLogger(__name__)

_STAGE_KEY = 'checkpoint.stage'
_STEP_KEY = 'checkpoint.step'
_LR_KEY = 'checkpoint.lr'


class Checkpoint(typing.NamedTuple):
    params: ParamSet
    adam: AdamState
    step: int
    stage: str
    settings: Settings

    def check(self) -> None:
        """Raise unless the stage tag and the frozen entries agree"""
        if self.stage not in STAGES:
            raise DensFieldContractViolation("unknown stage '{}', expected one of {}".format(self.stage, STAGES))
        if self.stage == STAGE_KD:
            unfrozen = [name for name in self.params.trainable_names()
                        if name.startswith(BACKBONE_PREFIX) or name.startswith(MV_HEAD_PREFIX)]
            if unfrozen:
                raise DensFieldContractViolation("distillation needs a frozen teacher, {} entries are trainable, "
                                                 "e.g. '{}'".format(len(unfrozen), unfrozen[0]))

    def digest(self) -> str:
        """Hash of the parameter values"""
        return params_digest(OrderedDict(self.params.items()))


def new_checkpoint(settings: Settings) -> Checkpoint:
    """Fresh stage one state: initialised network, single view head frozen, empty optimizer"""
    params = build_params(settings['head_size'], settings['seed'])
    params.freeze(SV_HEAD_PREFIX)
    adam = AdamState(settings['lr'], settings['adam_beta1'], settings['adam_beta2'], settings['adam_eps'])
    return Checkpoint(params, adam, 0, STAGE_MV, OrderedDict(settings))


def start_distillation(checkpoint: Checkpoint, settings: Settings) -> Checkpoint:
    """Stage two state: the trained teacher frozen, only the single view head trainable, fresh optimizer"""
    params = checkpoint.params.copy()
    params.unfreeze()
    params.freeze(BACKBONE_PREFIX)
    params.freeze(MV_HEAD_PREFIX)
    adam = AdamState(settings['kd_lr'], settings['adam_beta1'], settings['adam_beta2'], settings['adam_eps'])
    distilling = Checkpoint(params, adam, 0, STAGE_KD, OrderedDict(settings))
    distilling.check()
    return distilling


def checkpoint_arrays(checkpoint: Checkpoint) -> typing.Dict[str, np.ndarray]:
    arrays = OrderedDict(checkpoint.params.items())
    for name in checkpoint.params:
        if name in checkpoint.adam.m:
            arrays[ADAM_FIRST_MOMENT_PREFIX + name] = checkpoint.adam.m[name]
            arrays[ADAM_SECOND_MOMENT_PREFIX + name] = checkpoint.adam.v[name]
    arrays[ADAM_STEP_PATH] = np.array(float(checkpoint.adam.t))
    return arrays


def save_checkpoint(path, checkpoint: Checkpoint) -> None:
    checkpoint.check()
    metadata = OrderedDict([(_STAGE_KEY, checkpoint.stage), (_STEP_KEY, checkpoint.step),
                            (_LR_KEY, float(checkpoint.adam.lr))])  # type: typing.Dict[str, typing.Any]
    metadata.update(checkpoint.settings)
    write_checkpoint_file(path, checkpoint_arrays(checkpoint), checkpoint.params.frozen_names(), metadata)
    logger.info("wrote %s checkpoint at step %d to %s", checkpoint.stage, checkpoint.step, path)


def load_checkpoint(path) -> Checkpoint:
    """Inverse of save_checkpoint"""
    data = read_checkpoint_file(path)
    metadata = dict(data.metadata)
    try:
        stage = metadata.pop(_STAGE_KEY)
        step = int(metadata.pop(_STEP_KEY))
        lr = float(metadata.pop(_LR_KEY))
    except (KeyError, ValueError) as err:
        raise DensFieldParseError(path, 0, "checkpoint metadata lacks stage, step or lr: {}".format(err)) from err
    settings = default_settings()
    for key, text in metadata.items():
        settings[key] = parse_setting(key, text)
    frozen = set(data.frozen)
    params = ParamSet()
    adam = AdamState(lr, settings['adam_beta1'], settings['adam_beta2'], settings['adam_eps'])
    reserved = (ADAM_FIRST_MOMENT_PREFIX, ADAM_SECOND_MOMENT_PREFIX)
    for name, value in data.arrays.items():
        if name == ADAM_STEP_PATH:
            adam.t = int(value)
        elif name.startswith(ADAM_FIRST_MOMENT_PREFIX):
            adam.m[name[len(ADAM_FIRST_MOMENT_PREFIX):]] = value
        elif name.startswith(ADAM_SECOND_MOMENT_PREFIX):
            adam.v[name[len(ADAM_SECOND_MOMENT_PREFIX):]] = value
        elif not name.startswith(reserved):
            params.add(name, value, trainable=name not in frozen)
    if set(adam.m) != set(adam.v) or not set(adam.m) <= set(params):
        raise DensFieldParseError(path, 0, "optimizer moments do not match the parameters")
    checkpoint = Checkpoint(params, adam, step, stage, settings)
    checkpoint.check()
    return checkpoint
