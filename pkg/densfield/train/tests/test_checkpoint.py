# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.constants import STAGE_KD, STAGE_MV
from densfield.core.exceptions import DensFieldContractViolation, DensFieldParseError
from densfield.tensor.serialization import read_checkpoint_file, write_checkpoint_file
from densfield.tests.helpers import small_settings
from densfield.train import Checkpoint, load_checkpoint, new_checkpoint, save_checkpoint, start_distillation


@pytest.fixture(name='settings', scope='module')
def settings_fixture():
    return small_settings(seed=5)


def test_new_checkpoint_freezes_single_view_head(settings):
    checkpoint = new_checkpoint(settings)
    assert checkpoint.stage == STAGE_MV and checkpoint.step == 0
    assert checkpoint.params.frozen_names()
    assert all(name.startswith('heads.sv.') for name in checkpoint.params.frozen_names())
    assert checkpoint.adam.lr == settings['lr']


def test_distillation_freezes_teacher(settings):
    checkpoint = start_distillation(new_checkpoint(settings), settings)
    assert checkpoint.stage == STAGE_KD
    assert checkpoint.params.trainable_names()
    assert all(name.startswith('heads.sv.') for name in checkpoint.params.trainable_names())
    assert checkpoint.adam.t == 0 and checkpoint.adam.lr == settings['kd_lr']


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_kd_checkpoint_with_trainable_teacher():
    checkpoint = new_checkpoint(small_settings())
    checkpoint._replace(stage=STAGE_KD).check()


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_unknown_stage():
    new_checkpoint(small_settings())._replace(stage='joint').check()


def test_round_trip_with_moments(tmp_path, settings):
    checkpoint = new_checkpoint(settings)
    adam = checkpoint.adam.copy()
    adam.t = 3
    for name in checkpoint.params.trainable_names()[:2]:
        adam.m[name] = np.full(checkpoint.params[name].shape, 0.25)
        adam.v[name] = np.full(checkpoint.params[name].shape, 0.5)
    checkpoint = checkpoint._replace(adam=adam, step=3)
    save_checkpoint(tmp_path / 'state.dfld', checkpoint)
    loaded = load_checkpoint(tmp_path / 'state.dfld')
    assert loaded.params == checkpoint.params
    assert loaded.params.frozen_names() == checkpoint.params.frozen_names()
    assert loaded.adam == checkpoint.adam
    assert (loaded.step, loaded.stage) == (3, STAGE_MV)
    assert loaded.settings == checkpoint.settings
    assert loaded.digest() == checkpoint.digest()


def test_file_layout_reserves_optimizer_paths(tmp_path, settings):
    save_checkpoint(tmp_path / 'state.dfld', new_checkpoint(settings))
    data = read_checkpoint_file(tmp_path / 'state.dfld')
    assert data.arrays['adam.t'].shape == ()
    assert data.metadata['checkpoint.stage'] == STAGE_MV
    assert data.metadata['seed'] == '5'


@pytest.mark.xfail(raises=DensFieldParseError, strict=True)
def test_missing_stage_metadata(tmp_path):
    write_checkpoint_file(tmp_path / 'bare.dfld', {'backbone.x': np.zeros(2)}, (), {'seed': 1})
    load_checkpoint(tmp_path / 'bare.dfld')


def test_checkpoint_is_a_value(settings):
    first, second = new_checkpoint(settings), new_checkpoint(settings)
    assert isinstance(first, Checkpoint)
    assert first.digest() == second.digest()
