"""Datasets on disk: one directory per scene holding its metadata, frames and ground truth grids

    <root>/dataset.cfg                 n_scenes and the grid the ground truth was sampled on
    <root>/scene_0000/scene.cfg        primitives, ground, roles and timestamps
    <root>/scene_0000/frame_00.ppm     image of frame 0
    <root>/scene_0000/frame_00.cam     its camera
    <root>/scene_0000/occupancy.grid   OGRD1 ground truth occupancy
    <root>/scene_0000/visibility.grid  OGRD1 visibility from the reference camera
"""
import logging
import typing
from collections import OrderedDict
from pathlib import Path

import numpy as np

from densfield.core.config import read_kv_file, write_kv_file
from densfield.core.exceptions import DensFieldParseError, DensFieldContractViolation
from densfield.geometry import read_camera_file, write_camera_file
from densfield.synthetic.frames import Frame, FrameSet, RigConfig, build_frameset
from densfield.synthetic.grids import GridSpec, read_grid_file, write_grid_file
from densfield.synthetic.oracle import observed, occupancy
from densfield.synthetic.ppm import read_ppm, write_ppm
from densfield.synthetic.scene import Box, SceneGT, SceneGenConfig, Sphere, generate_scene
from densfield.tools.checksum import tree_checksum

logger = logging.getLogger(__name__)

DATASET_FILE = 'dataset.cfg'
SCENE_FILE = 'scene.cfg'
OCCUPANCY_FILE = 'occupancy.grid'
VISIBILITY_FILE = 'visibility.grid'


class SceneRecord(typing.NamedTuple):
    scene: SceneGT
    frameset: FrameSet
    occupancy: np.ndarray  # (nx, ny, nz) bool
    visibility: np.ndarray  # (nx, ny, nz) bool, seen by the reference camera
    grid: GridSpec


def scene_seed(seed: int, split: str, index: int) -> int:
    """Seed of the index-th scene of a split, a pure function of the dataset seed

    >>> scene_seed(7, 'train', 0) == scene_seed(7, 'train', 0) != scene_seed(7, 'test', 0)
    True
    """
    return int(np.random.SeedSequence([seed, index] + list(split.encode('utf-8'))).generate_state(1)[0])


def build_record(seed: int, gen_config: SceneGenConfig, rig: RigConfig, grid: GridSpec) -> SceneRecord:
    """Scene, frameset and ground truth grids for one scene seed"""
    scene = generate_scene(seed, gen_config)
    frameset = build_frameset(scene, rig, seed)
    centers = grid.cell_centers()
    return SceneRecord(scene, frameset, occupancy(scene, centers),
                       observed(scene, [frameset.frames[0].camera], centers), grid)


def generate_split(seed: int, split: str, n_scenes: int, settings: typing.Mapping[str, typing.Any]) \
        -> typing.List[SceneRecord]:
    """n_scenes records built from the resolved settings"""
    gen_config = SceneGenConfig.from_settings(settings)
    rig = RigConfig.from_settings(settings)
    grid = GridSpec.from_settings(settings)
    return [build_record(scene_seed(seed, split, index), gen_config, rig, grid) for index in range(n_scenes)]


def _int_list(values: typing.Iterable[int]) -> str:
    return ','.join(str(value) for value in values)


def scene_metadata(record: SceneRecord) -> typing.Dict[str, typing.Any]:
    """The scene.cfg entries of a record"""
    scene, frameset = record.scene, record.frameset
    values = OrderedDict([
        ('seed', scene.seed),
        ('sigma_solid', float(scene.sigma_solid)),
        ('ground_height', float(scene.ground_height)),
        ('ground_albedo', tuple(scene.ground_albedo)),
        ('bounds_low', tuple(scene.bounds[0])),
        ('bounds_high', tuple(scene.bounds[1])),
        ('n_boxes', len(scene.boxes)),
        ('n_spheres', len(scene.spheres)),
    ])  # type: typing.Dict[str, typing.Any]
    for index, box in enumerate(scene.boxes):
        values['box_{}_center'.format(index)] = tuple(box.center)
        values['box_{}_size'.format(index)] = tuple(box.size)
        values['box_{}_albedo'.format(index)] = tuple(box.albedo)
    for index, sphere in enumerate(scene.spheres):
        values['sphere_{}_center'.format(index)] = tuple(sphere.center)
        values['sphere_{}_radius'.format(index)] = float(sphere.radius)
        values['sphere_{}_albedo'.format(index)] = tuple(sphere.albedo)
    values['n_frames'] = len(frameset.frames)
    values['timestamps'] = _int_list(frame.timestamp for frame in frameset.frames)
    values['density'] = _int_list(frameset.density)
    values['loss'] = _int_list(frameset.loss)
    values['render'] = _int_list(frameset.render)
    return values


class _MetadataReader:
    """Typed access to a scene.cfg, failures name the file"""

    def __init__(self, path: Path):
        self.path = path
        self.values = read_kv_file(path)

    def _get(self, key: str, convert: typing.Callable[[str], typing.Any]) -> typing.Any:
        try:
            return convert(self.values[key])
        except KeyError as err:
            raise DensFieldParseError(self.path, 0, "missing key '{}'".format(key)) from err
        except ValueError as err:
            raise DensFieldParseError(self.path, 0, "bad value for '{}': {}".format(key, err)) from err

    def integer(self, key: str) -> int:
        return self._get(key, int)

    def real(self, key: str) -> float:
        return self._get(key, float)

    def reals(self, key: str, count: int = 3) -> tuple:
        values = self._get(key, lambda text: tuple(float(item) for item in text.split(',')))
        if len(values) != count:
            raise DensFieldParseError(self.path, 0, "'{}' needs {} values, got {}".format(key, count, len(values)))
        return values

    def integers(self, key: str) -> typing.Tuple[int, ...]:
        return self._get(key, lambda text: tuple(int(item) for item in text.split(',') if item.strip()))


def parse_scene(reader: _MetadataReader) -> SceneGT:
    boxes = tuple(Box(reader.reals('box_{}_center'.format(index)), reader.reals('box_{}_size'.format(index)),
                      reader.reals('box_{}_albedo'.format(index))) for index in range(reader.integer('n_boxes')))
    spheres = tuple(Sphere(reader.reals('sphere_{}_center'.format(index)),
                           reader.real('sphere_{}_radius'.format(index)),
                           reader.reals('sphere_{}_albedo'.format(index)))
                    for index in range(reader.integer('n_spheres')))
    return SceneGT(boxes, spheres, reader.real('ground_height'), reader.reals('ground_albedo'),
                   reader.real('sigma_solid'), (reader.reals('bounds_low'), reader.reals('bounds_high')),
                   reader.integer('seed'))


def _scene_dir(root: Path, index: int) -> Path:
    return root / 'scene_{:04d}'.format(index)


def _frame_stem(index: int) -> str:
    return 'frame_{:02d}'.format(index)


def write_dataset(path, records: typing.Sequence[SceneRecord]) -> str:
    """Write every record below path

    Args:
        path: dataset root, created when missing
        records: scenes with their framesets and ground truth grids, all on the same grid

    Returns:
        the tree checksum of the written dataset
    """
    root = Path(path)
    grids = {record.grid for record in records}
    if len(grids) > 1:
        raise DensFieldContractViolation("records of {} are sampled on {} different grids".format(root, len(grids)))
    header = OrderedDict([('n_scenes', len(records))])  # type: typing.Dict[str, typing.Any]
    if records:
        grid = records[0].grid
        header.update([('grid_resolution', _int_list(grid.resolution)), ('grid_low', grid.low),
                       ('grid_high', grid.high)])
    write_kv_file(root / DATASET_FILE, header)
    for index, record in enumerate(records):
        directory = _scene_dir(root, index)
        write_kv_file(directory / SCENE_FILE, scene_metadata(record))
        for frame_index, frame in enumerate(record.frameset.frames):
            write_ppm(directory / (_frame_stem(frame_index) + '.ppm'), frame.image)
            write_camera_file(directory / (_frame_stem(frame_index) + '.cam'), frame.camera)
        write_grid_file(directory / OCCUPANCY_FILE, record.occupancy, record.grid)
        write_grid_file(directory / VISIBILITY_FILE, record.visibility, record.grid)
    checksum = tree_checksum(root)
    logger.info("wrote %d scenes to %s, checksum %s", len(records), root, checksum)
    return checksum


def read_scene(directory: Path) -> SceneRecord:
    reader = _MetadataReader(directory / SCENE_FILE)
    scene = parse_scene(reader)
    n_frames = reader.integer('n_frames')
    timestamps = reader.integers('timestamps')
    if len(timestamps) != n_frames:
        raise DensFieldParseError(reader.path, 0, "{} timestamps for {} frames".format(len(timestamps), n_frames))
    frames = tuple(Frame(read_ppm(directory / (_frame_stem(index) + '.ppm')),
                         read_camera_file(directory / (_frame_stem(index) + '.cam')), timestamps[index])
                   for index in range(n_frames))
    frameset = FrameSet(frames, reader.integers('density'), reader.integers('loss'), reader.integers('render'))
    frameset.check_roles()
    occupancy_bits, grid = read_grid_file(directory / OCCUPANCY_FILE)
    visibility_bits, visibility_grid = read_grid_file(directory / VISIBILITY_FILE)
    if visibility_grid != grid:
        raise DensFieldParseError(directory / VISIBILITY_FILE, 0, "grid differs from {}".format(OCCUPANCY_FILE))
    return SceneRecord(scene, frameset, occupancy_bits, visibility_bits, grid)


def read_dataset(path) -> typing.List[SceneRecord]:
    """Every scene record below a dataset root written by write_dataset"""
    root = Path(path)
    reader = _MetadataReader(root / DATASET_FILE)
    records = [read_scene(_scene_dir(root, index)) for index in range(reader.integer('n_scenes'))]
    logger.debug("read %d scenes from %s", len(records), root)
    return records
