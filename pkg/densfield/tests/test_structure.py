# pylint: disable=missing-function-docstring
import densfield
from densfield.core.config import default_settings
from densfield.core.constants import EVAL_MODES, HEAD_SIZES, REPORT_COLUMNS
from densfield.eval import EvalConfig
from densfield.eval.occupancy import resolve_mode
from densfield.geometry import SamplerConfig
from densfield.losses import LossConfig
from densfield.models import build_params
from densfield.synthetic import GridSpec, RigConfig, SceneGenConfig
from densfield.train import TrainConfig


def test_version():
    """Verify we can compute a version"""
    assert len(densfield.__version__) > 0


def test_typed_configs_read_registered_keys():
    settings = default_settings()
    for config in (SceneGenConfig, RigConfig, SamplerConfig, LossConfig, TrainConfig, EvalConfig, GridSpec):
        config.from_settings(settings)


def test_every_eval_mode_resolves():
    assert [resolve_mode(mode)[0] for mode in EVAL_MODES] == list(EVAL_MODES)


def test_report_has_ten_columns():
    assert len(REPORT_COLUMNS) == 10


def test_every_head_size_builds():
    for head_size in HEAD_SIZES:
        params = build_params(head_size, seed=0)
        assert any(name.startswith('heads.mv.') for name in params)
        assert any(name.startswith('heads.sv.') for name in params)
