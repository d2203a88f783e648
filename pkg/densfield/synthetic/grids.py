"""Regular evaluation grids and the OGRD1 bit grid file format

OGRD1 layout (little endian): magic, u32 nx ny nz, 6 float64 bounds (x_min x_max y_min y_max z_min z_max), then
nx * ny * nz bytes of 0 or 1 with x varying fastest.
"""
import typing
from pathlib import Path

import numpy as np

from densfield.core.binary import ByteReader, pack_u32
from densfield.core.constants import FLOAT_DTYPE, GRID_MAGIC, VISIBILITY_OPTICAL_DEPTH
from densfield.core.exceptions import DensFieldContractViolation, DensFieldIOError


class GridSpec(typing.NamedTuple):
    """Cells of an axis aligned box, indexed [ix, iy, iz]"""
    resolution: typing.Tuple[int, int, int]
    low: typing.Tuple[float, float, float]
    high: typing.Tuple[float, float, float]

    @classmethod
    def from_settings(cls, settings: typing.Mapping[str, typing.Any]) -> 'GridSpec':
        return cls.checked((settings['grid_nx'], settings['grid_ny'], settings['grid_nz']),
                           (settings['eval_x_min'], settings['eval_y_min'], settings['eval_z_min']),
                           (settings['eval_x_max'], settings['eval_y_max'], settings['eval_z_max']))

    @classmethod
    def checked(cls, resolution, low, high) -> 'GridSpec':
        resolution = tuple(int(value) for value in resolution)
        low = tuple(float(value) for value in low)
        high = tuple(float(value) for value in high)
        if len(resolution) != 3 or min(resolution) < 1:
            raise DensFieldContractViolation("grid resolution must be 3 positive counts, got {}".format(resolution))
        if len(low) != 3 or len(high) != 3 or not all(a < b for a, b in zip(low, high)):
            raise DensFieldContractViolation("grid bounds {} to {} are empty".format(low, high))
        return cls(resolution, low, high)

    @property
    def cell_size(self) -> np.ndarray:
        return (np.asarray(self.high) - np.asarray(self.low)) / np.asarray(self.resolution)

    @property
    def voxel_volume(self) -> float:
        return float(np.prod(self.cell_size))

    def default_threshold(self) -> float:
        """Density at which one voxel of material has transmittance one half

        >>> abs(GridSpec((2, 2, 2), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0)).default_threshold() - 2.0 * np.log(2.0)) < 1e-12
        True
        """
        return VISIBILITY_OPTICAL_DEPTH / float(np.cbrt(self.voxel_volume))

    def axis_centers(self, axis: int) -> np.ndarray:
        step = self.cell_size[axis]
        return self.low[axis] + (np.arange(self.resolution[axis]) + 0.5) * step

    def cell_centers(self) -> np.ndarray:
        """(nx, ny, nz, 3) world coordinates of every cell center"""
        xs, ys, zs = (self.axis_centers(axis) for axis in range(3))
        return np.stack(np.meshgrid(xs, ys, zs, indexing='ij'), axis=-1).astype(FLOAT_DTYPE)


def encode_grid(bits: np.ndarray, spec: GridSpec) -> bytes:
    bits = np.asarray(bits)
    if bits.shape != spec.resolution:
        raise DensFieldContractViolation("grid of shape {} does not match resolution {}".format(
            bits.shape, spec.resolution))
    if bits.dtype != np.bool_ and not np.all((bits == 0) | (bits == 1)):
        raise DensFieldContractViolation("grid cells must be 0 or 1")
    bounds = np.array([value for pair in zip(spec.low, spec.high) for value in pair], dtype='<f8')
    header = GRID_MAGIC + b''.join(pack_u32(count) for count in spec.resolution) + bounds.tobytes()
    return header + bits.astype(np.uint8).ravel(order='F').tobytes()


def decode_grid(raw: bytes, path: typing.Any = '<bytes>') -> typing.Tuple[np.ndarray, GridSpec]:
    """Inverse of encode_grid

    Returns:
        boolean bits (nx, ny, nz) and the grid spec

    >>> bits, spec = decode_grid(encode_grid(np.ones((1, 1, 2), bool), GridSpec((1, 1, 2), (0, 0, 0), (1, 1, 1))))
    >>> bits.ravel().tolist(), spec.resolution
    ([True, True], (1, 1, 2))
    """
    reader = ByteReader(raw, path)
    reader.expect(GRID_MAGIC)
    resolution = tuple(reader.u32(name) for name in ('nx', 'ny', 'nz'))
    bounds = reader.float64s(6, 'bounds')
    if min(resolution) < 1 or not np.all(bounds[0::2] < bounds[1::2]):
        raise reader.fail("degenerate grid {} with bounds {}".format(resolution, bounds.tolist()))
    start = reader.offset
    cells = np.frombuffer(reader.take(int(np.prod(resolution)), 'cells'), dtype=np.uint8)
    if np.any(cells > 1):
        reader.offset = start + int(np.argmax(cells > 1))
        raise reader.fail("cell value {} is not 0 or 1".format(int(cells[cells > 1][0])))
    reader.finish()
    spec = GridSpec(resolution, tuple(bounds[0::2].tolist()), tuple(bounds[1::2].tolist()))
    return cells.reshape(resolution, order='F').astype(bool), spec


def write_grid_file(path, bits: np.ndarray, spec: GridSpec) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_grid(bits, spec))
    except OSError as err:
        raise DensFieldIOError("could not write grid {}: {}".format(path, err)) from err


def read_grid_file(path) -> typing.Tuple[np.ndarray, GridSpec]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise DensFieldIOError("could not read grid {}: {}".format(path, err)) from err
    return decode_grid(raw, path)
