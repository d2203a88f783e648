"""The DFLD1 checkpoint container

Layout, all integers u32 little-endian:
magic, parameter count, then per parameter: path (length + utf-8), rank, extents, float64 values;
then the frozen path list (count + paths); then the metadata block (length + utf-8 ``key = value`` text).
"""
import typing
from collections import OrderedDict
from pathlib import Path

import numpy as np

from densfield.core.binary import ByteReader, pack_u32, pack_text
from densfield.core.config import format_kv_text, parse_kv_text
from densfield.core.constants import CHECKPOINT_MAGIC, FLOAT_DTYPE
from densfield.core.exceptions import DensFieldIOError, DensFieldParseError

Arrays = typing.Dict[str, np.ndarray]


class CheckpointData(typing.NamedTuple):
    arrays: Arrays
    frozen: typing.List[str]
    metadata: typing.Dict[str, str]


def encode_checkpoint(arrays: typing.Mapping[str, np.ndarray], frozen: typing.Sequence[str] = (),
                      metadata: typing.Optional[typing.Mapping[str, typing.Any]] = None) -> bytes:
    """Serialize named arrays in their iteration order"""
    chunks = [CHECKPOINT_MAGIC, pack_u32(len(arrays))]
    for name, value in arrays.items():
        array = np.asarray(value, dtype=FLOAT_DTYPE)
        chunks.append(pack_text(name))
        chunks.append(pack_u32(array.ndim))
        chunks.extend(pack_u32(extent) for extent in array.shape)
        chunks.append(np.ascontiguousarray(array, dtype='<f8').tobytes())
    chunks.append(pack_u32(len(frozen)))
    chunks.extend(pack_text(name) for name in frozen)
    chunks.append(pack_text(format_kv_text(metadata or {})))
    return b''.join(chunks)


def decode_checkpoint(raw: bytes, path: typing.Any = '<bytes>') -> CheckpointData:
    """Inverse of encode_checkpoint, malformed input raises DensFieldParseError with the byte offset

    The u32 parameter count sits between the magic and the first record, so a reader that expects the records
    straight after the magic would take the count for the first path length.
    """
    reader = ByteReader(raw, path)
    reader.expect(CHECKPOINT_MAGIC)
    arrays = OrderedDict()  # type: Arrays
    for _ in range(reader.u32('parameter count')):
        start = reader.offset
        name = reader.text('parameter path')
        if name in arrays:
            reader.offset = start
            raise reader.fail("duplicate parameter '{}'".format(name))
        shape = tuple(reader.u32('extent') for _ in range(reader.u32('rank')))
        arrays[name] = reader.float64s(int(np.prod(shape, dtype=np.int64)), name).reshape(shape)
    frozen = [reader.text('frozen path') for _ in range(reader.u32('frozen count'))]
    start = reader.offset
    metadata_text = reader.text('metadata')
    try:
        metadata = parse_kv_text(metadata_text, path)
    except DensFieldParseError as err:
        raise DensFieldParseError(path, start + 4 + err.offset, err.reason) from err
    reader.finish()
    unknown = [name for name in frozen if name not in arrays]
    if unknown:
        raise DensFieldParseError(path, start, "frozen paths {} are not parameters".format(unknown))
    return CheckpointData(arrays, frozen, dict(metadata))


def write_checkpoint_file(path, arrays: typing.Mapping[str, np.ndarray], frozen: typing.Sequence[str] = (),
                          metadata: typing.Optional[typing.Mapping[str, typing.Any]] = None) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_checkpoint(arrays, frozen, metadata))
    except OSError as err:
        raise DensFieldIOError("could not write checkpoint {}: {}".format(path, err)) from err


def read_checkpoint_file(path) -> CheckpointData:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise DensFieldIOError("could not read checkpoint {}: {}".format(path, err)) from err
    return decode_checkpoint(raw, path)
