# pylint: disable=missing-function-docstring
import numba
import pytest

from densfield.cli import run
from densfield.cli.main import configure_threads
from densfield.core.config import SETTINGS, read_snapshot
from densfield.core.exceptions import DensFieldContractViolation
from densfield.tests.helpers import SMALL_OVERRIDES
from densfield.tools.checksum import tree_checksum

SMALL = [argument for key, value in SMALL_OVERRIDES.items() for argument in ('--set', '{}={}'.format(key, value))]


def test_missing_subcommand(capsys):
    assert run([]) == 2
    assert 'usage' in capsys.readouterr().err


def test_unknown_subcommand():
    assert run(['fly', '--out', 'x']) == 2


def test_help_exits_cleanly():
    assert run(['--help']) == 0


def test_unknown_setting(tmp_path, capsys):
    assert run(['gen-data', '--out', str(tmp_path), '--set', 'warp_factor=9']) == 1
    assert 'warp_factor' in capsys.readouterr().err


def test_missing_dataset(tmp_path):
    assert run(['train-mv', '--out', str(tmp_path / 'run'), '--dataset', str(tmp_path / 'nowhere')] + SMALL) == 1


def test_gen_data_is_deterministic(tmp_path):
    for name in ('first', 'second'):
        assert run(['gen-data', '--seed', '7', '--out', str(tmp_path / name)] + SMALL) == 0
    assert tree_checksum(tmp_path / 'first' / 'train') == tree_checksum(tmp_path / 'second' / 'train')
    assert tree_checksum(tmp_path / 'first' / 'test') == tree_checksum(tmp_path / 'second' / 'test')
    snapshot = read_snapshot(tmp_path / 'first' / 'resolved.cfg')
    assert set(snapshot) == set(SETTINGS)
    assert snapshot['seed'] == 7 and snapshot['n_cameras'] == SMALL_OVERRIDES['n_cameras']
    text = (tmp_path / 'first' / 'resolved.cfg').read_text(encoding='utf-8')
    assert 'densfield_version' in text and 'numpy_version' in text


def test_config_file_then_overrides(tmp_path):
    config = tmp_path / 'tiny.cfg'
    config.write_text('n_scenes = 1\nn_test_scenes = 1\n', encoding='utf-8')
    assert run(['gen-data', '--config', str(config), '--set', 'n_test_scenes=2', '--out', str(tmp_path / 'data')]
               + SMALL[:-4]) == 0
    assert read_snapshot(tmp_path / 'data' / 'resolved.cfg')['n_test_scenes'] == 2
    assert (tmp_path / 'data' / 'test' / 'scene_0001').is_dir()


def test_full_pipeline(tmp_path):
    data, run_dir, report_dir = tmp_path / 'data', tmp_path / 'run', tmp_path / 'eval'
    assert run(['gen-data', '--out', str(data)] + SMALL) == 0
    assert run(['train-mv', '--dataset', str(data / 'train'), '--out', str(run_dir)] + SMALL) == 0
    assert run(['distill', '--dataset', str(data / 'train'), '--checkpoint', str(run_dir / 'mv.dfld'),
                '--out', str(run_dir)] + SMALL) == 0
    assert run(['eval-occ', '--dataset', str(data / 'test'), '--checkpoint', str(run_dir / 'kd.dfld'),
                '--out', str(report_dir)] + SMALL) == 0
    lines = (report_dir / 'report.csv').read_text(encoding='utf-8').splitlines()
    assert [line.split(',')[0] for line in lines[1:]] == ['sv', 'mv-1view', 'mv-2view', 'kd']
    assert (report_dir / 'resolved.cfg').exists()
    assert run(['render-profile', '--dataset', str(data / 'test'), '--checkpoint', str(run_dir / 'kd.dfld'),
                '--mode', 'kd', '--scene', '0', '--out', str(tmp_path / 'profiles')] + SMALL) == 0
    assert (tmp_path / 'profiles' / 'profile_0000_kd.ppm').exists()


def test_distill_needs_teacher(tmp_path):
    assert run(['distill', '--dataset', str(tmp_path), '--out', str(tmp_path)]) == 2


def test_thread_cap_accepts_one():
    before = numba.get_num_threads()
    try:
        configure_threads({'DENSFIELD_THREADS': '1'})
        assert numba.get_num_threads() == 1
    finally:
        numba.set_num_threads(before)


@pytest.mark.xfail(raises=DensFieldContractViolation, strict=True)
def test_thread_cap_must_be_a_number():
    configure_threads({'DENSFIELD_THREADS': 'many'})
