"""The flat ``key = value`` dialect shared by configs, dataset metadata and run snapshots

Every key densfield understands is registered in SETTINGS together with its type and default.
"""
import typing
from collections import OrderedDict
from pathlib import Path

from densfield.core.cache import environment_versions
from densfield.core.exceptions import DensFieldParseError, DensFieldUnknownKey, DensFieldIOError, \
    DensFieldContractViolation

PathType = typing.Union[str, Path]
Settings = typing.Dict[str, typing.Any]

_TRUE_WORDS = {'true', '1', 'yes', 'on'}
_FALSE_WORDS = {'false', '0', 'no', 'off'}


def _parse_bool(text: str) -> bool:
    word = text.strip().lower()
    if word in _TRUE_WORDS:
        return True
    if word in _FALSE_WORDS:
        return False
    raise ValueError("'{}' is not a boolean".format(text))


def _parse_floats(text: str) -> typing.Tuple[float, ...]:
    return tuple(float(item) for item in text.split(',') if item.strip())


def _format_value(value: typing.Any) -> str:
    """Render a typed value back in to the dialect, floats use repr so they round trip exactly"""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, (tuple, list)):
        return ','.join(_format_value(item) for item in value)
    return str(value)


# maps the declared type of a setting to the function parsing its text form
TYPE_TO_PARSER = {
    'int': int,
    'float': float,
    'bool': _parse_bool,
    'str': str.strip,
    'floats': _parse_floats,
}  # type: typing.Dict[str, typing.Callable[[str], typing.Any]]

_PALETTE = (0.85, 0.25, 0.2,
            0.2, 0.55, 0.85,
            0.95, 0.8, 0.25,
            0.3, 0.75, 0.35,
            0.7, 0.4, 0.8,
            0.9, 0.9, 0.9)

# key: (type, default)
SETTINGS = OrderedDict([
    ('seed', ('int', 0)),
    # dataset
    ('n_scenes', ('int', 64)),
    ('n_test_scenes', ('int', 16)),
    # scene generation
    ('n_primitives', ('int', 6)),
    ('sigma_solid', ('float', 50.0)),
    ('ground_height', ('float', 1.5)),
    ('box_size_min', ('float', 1.0)),
    ('box_size_max', ('float', 4.0)),
    ('sphere_radius_min', ('float', 0.5)),
    ('sphere_radius_max', ('float', 1.5)),
    ('scene_x_min', ('float', -9.0)),
    ('scene_x_max', ('float', 9.0)),
    ('scene_z_min', ('float', 3.0)),
    ('scene_z_max', ('float', 23.0)),
    ('albedo_palette', ('floats', _PALETTE)),
    ('ground_albedo', ('floats', (0.35, 0.35, 0.35))),
    # camera rig
    ('image_width', ('int', 96)),
    ('image_height', ('int', 64)),
    ('focal_px', ('float', 32.0)),
    ('n_cameras', ('int', 6)),
    ('n_density_views', ('int', 3)),
    ('baseline', ('float', 0.54)),
    ('rig_speed', ('float', 5.0)),
    ('time_offset_min', ('float', 0.1)),
    ('time_offset_max', ('float', 0.8)),
    ('yaw_jitter_deg', ('float', 1.0)),
    ('density_loss_overlap', ('bool', True)),
    ('gt_step', ('float', 0.05)),
    ('gt_far', ('float', 60.0)),
    # ray sampling
    ('n_samples', ('int', 64)),
    ('z_near', ('float', 3.0)),
    ('z_far', ('float', 23.0)),
    ('sampling_mode', ('str', 'inverse')),
    # training
    ('batch_size', ('int', 8)),
    ('patches_per_item', ('int', 32)),
    ('patch_size', ('int', 8)),
    ('steps_mv', ('int', 20000)),
    ('steps_kd', ('int', 2000)),
    ('lr', ('float', 1e-4)),
    ('lr_final', ('float', 1e-5)),
    ('lr_final_fraction', ('float', 0.2)),
    ('kd_lr', ('float', 1e-4)),
    ('adam_beta1', ('float', 0.9)),
    ('adam_beta2', ('float', 0.999)),
    ('adam_eps', ('float', 1e-8)),
    ('view_dropout', ('float', 0.5)),
    ('color_jitter', ('bool', True)),
    ('jitter_strength', ('float', 0.1)),
    ('flip', ('bool', True)),
    ('flip_probability', ('float', 0.5)),
    ('head_size', ('str', 'middle')),
    ('checkpoint_fraction', ('float', 0.1)),
    ('log_every', ('int', 50)),
    ('debug_roles', ('bool', False)),
    # losses
    ('lambda_l1', ('float', 0.15)),
    ('lambda_ssim', ('float', 0.85)),
    ('lambda_eas', ('float', 1e-3)),
    ('ssim_c1', ('float', 0.01 ** 2)),
    ('ssim_c2', ('float', 0.03 ** 2)),
    # evaluation
    ('grid_nx', ('int', 64)),
    ('grid_ny', ('int', 16)),
    ('grid_nz', ('int', 64)),
    ('eval_x_min', ('float', -9.0)),
    ('eval_x_max', ('float', 9.0)),
    ('eval_y_min', ('float', 0.0)),
    ('eval_y_max', ('float', 1.0)),
    ('eval_z_min', ('float', 3.0)),
    ('eval_z_max', ('float', 23.0)),
    ('tau_occ', ('float', 0.0)),
    ('eval_views', ('int', 2)),
    ('depth_bins', ('int', 10)),
])  # type: typing.Dict[str, typing.Tuple[str, typing.Any]]


def parse_kv_text(text: str, path: PathType = '<string>') -> typing.Dict[str, str]:
    """Split ``key = value`` text in to an ordered mapping of raw strings

    Args:
        text: the file contents
        path: only used to name the file in parse errors

    Returns:
        ordered mapping of key to the raw (stripped) value text

    >>> dict(parse_kv_text('# rig\\nn_cameras = 4\\nbaseline=0.5\\n'))
    {'n_cameras': '4', 'baseline': '0.5'}
    """
    values = OrderedDict()  # type: typing.Dict[str, str]
    offset = 0
    for line in text.splitlines(keepends=True):
        content = line.split('#', 1)[0].strip()
        if content:
            if '=' not in content:
                raise DensFieldParseError(path, offset, "expected 'key = value', got '{}'".format(content))
            key, value = (part.strip() for part in content.split('=', 1))
            if not key:
                raise DensFieldParseError(path, offset, "empty key")
            if key in values:
                raise DensFieldParseError(path, offset, "duplicate key '{}'".format(key))
            values[key] = value
        offset += len(line.encode('utf-8'))
    return values


def format_kv_text(values: typing.Mapping[str, typing.Any]) -> str:
    """Inverse of parse_kv_text for typed values

    >>> format_kv_text({'seed': 7, 'flip': True, 'lr': 0.0001})
    'seed = 7\\nflip = true\\nlr = 0.0001\\n'
    """
    return ''.join('{} = {}\n'.format(key, _format_value(value)) for key, value in values.items())


def read_kv_file(path: PathType) -> typing.Dict[str, str]:
    """Read a ``key = value`` file from disk"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise DensFieldIOError("could not read {}: {}".format(path, err)) from err
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as err:
        raise DensFieldParseError(path, err.start, "invalid utf-8") from err
    return parse_kv_text(text, path)


def write_kv_file(path: PathType, values: typing.Mapping[str, typing.Any]) -> None:
    """Write typed values in the ``key = value`` dialect"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(format_kv_text(values).encode('utf-8'))
    except OSError as err:
        raise DensFieldIOError("could not write {}: {}".format(path, err)) from err


def parse_setting(key: str, text: str) -> typing.Any:
    """Convert the text of a registered setting to its declared type"""
    try:
        setting_type, _ = SETTINGS[key]
    except KeyError as err:
        raise DensFieldUnknownKey("'{}' is not a recognised setting".format(key)) from err
    try:
        return TYPE_TO_PARSER[setting_type](text)
    except ValueError as err:
        raise DensFieldContractViolation("setting '{}' expects {}, got '{}'".format(key, setting_type, text)) from err


def default_settings() -> Settings:
    """A fresh copy of every setting at its default value"""
    return OrderedDict((key, default) for key, (_, default) in SETTINGS.items())


def parse_override(override: str) -> typing.Tuple[str, str]:
    """Split a ``--set key=value`` argument

    >>> parse_override('lr=0.001')
    ('lr', '0.001')
    """
    if '=' not in override:
        raise DensFieldContractViolation("override '{}' must look like key=value".format(override))
    key, value = override.split('=', 1)
    return key.strip(), value.strip()


def resolve_settings(config_path: typing.Optional[PathType] = None,
                     overrides: typing.Iterable[str] = (),
                     seed: typing.Optional[int] = None) -> Settings:
    """Defaults, then the config file, then the overrides, then the seed

    Args:
        config_path: optional ``key = value`` file
        overrides: ``key=value`` strings applied after the file
        seed: when given replaces the seed setting

    Returns:
        every registered setting with its resolved typed value

    >>> resolve_settings(overrides=['n_cameras=4'], seed=3)['n_cameras']
    4
    """
    settings = default_settings()
    if config_path is not None:
        for key, text in read_kv_file(config_path).items():
            settings[key] = parse_setting(key, text)
    for key, text in map(parse_override, overrides):
        settings[key] = parse_setting(key, text)
    if seed is not None:
        settings['seed'] = int(seed)
    return settings


def write_snapshot(path: PathType, settings: Settings) -> None:
    """Write the resolved settings together with the environment versions that produced a run"""
    snapshot = OrderedDict(settings)
    snapshot.update(environment_versions())
    write_kv_file(path, snapshot)


def read_snapshot(path: PathType) -> Settings:
    """Read back a snapshot, environment entries are ignored"""
    environment_keys = set(environment_versions())
    settings = default_settings()
    for key, text in read_kv_file(path).items():
        if key not in environment_keys:
            settings[key] = parse_setting(key, text)
    return settings
