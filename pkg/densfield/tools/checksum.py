"""Digests of arrays, parameter sets and artifact trees

Used to prove determinism: the same seed and config must produce byte-identical checkpoints,
datasets, grids, reports and profiles.
"""
import hashlib
import types
import typing
from pathlib import Path

import numpy as np

from densfield.core.constants import HashAlgoType, DEFAULT_HASH_ALGO, FILE_IO_CHUNK_SIZE, FLOAT_DTYPE
from densfield.core.exceptions import DensFieldContractViolation, DensFieldIOError


def resolve_hash_algo(hash_algo: HashAlgoType) -> typing.Callable:
    """Turn a hashlib name in to its constructor, constructors pass through

    >>> resolve_hash_algo('sha256') is hashlib.sha256
    True
    """
    if isinstance(hash_algo, str):
        try:
            return getattr(hashlib, hash_algo)
        except AttributeError as err:
            raise DensFieldContractViolation("'{}' is not a hashlib algorithm".format(hash_algo)) from err
    return hash_algo


def bytes_to_digest(bytes_data: typing.Union[bytes, bytearray, typing.Generator],
                    hash_algo: HashAlgoType = DEFAULT_HASH_ALGO) -> bytes:
    """Raw digest of a byte string or of the concatenation of the chunks a generator yields

    >>> len(bytes_to_digest(b"abc")), bytes_to_digest(b"abc") == bytes_to_digest(part for part in (b"a", b"bc"))
    (32, True)
    """
    hasher = resolve_hash_algo(hash_algo)()
    if isinstance(bytes_data, (bytes, bytearray)):
        hasher.update(bytes_data)
    elif isinstance(bytes_data, types.GeneratorType):
        for chunk in bytes_data:
            hasher.update(chunk)
    else:
        raise DensFieldContractViolation("'{}' type is not valid for bytes data".format(type(bytes_data)))

    return hasher.digest()


def _array_bytes(array: np.ndarray) -> bytes:
    """Shape header plus little endian float64 payload, so equal values always hash equal"""
    array = np.ascontiguousarray(array, dtype=FLOAT_DTYPE)
    header = ','.join(map(str, array.shape)).encode() + b'|'
    return header + array.astype('<f8').tobytes()


def array_digest(array: np.ndarray, hash_algo: HashAlgoType = DEFAULT_HASH_ALGO) -> str:
    """Hex digest of an array's shape and values

    >>> array_digest(np.zeros(2)) == array_digest(np.zeros(2))
    True
    >>> array_digest(np.zeros(2)) == array_digest(np.zeros((2, 1)))
    False
    """
    return bytes_to_digest(_array_bytes(array), hash_algo).hex()


def params_digest(named_arrays: typing.Mapping[str, np.ndarray], hash_algo: HashAlgoType = DEFAULT_HASH_ALGO) -> str:
    """Hex digest over named arrays, independent of insertion order"""

    def _generator():
        for name in sorted(named_arrays):
            yield name.encode('utf-8') + b'\x00'
            yield _array_bytes(named_arrays[name])

    return bytes_to_digest(_generator(), hash_algo).hex()


def _file_to_bytes_generator(path: Path):
    """Read the bytes of a file in chunks"""
    with path.open('rb') as handle:
        while True:
            chunk = handle.read(FILE_IO_CHUNK_SIZE)
            if len(chunk) == 0:
                break
            yield chunk


def file_digest(path: typing.Union[str, Path], hash_algo: HashAlgoType = DEFAULT_HASH_ALGO) -> str:
    """Hex digest of the contents of a file, the path itself is not included"""
    path = Path(path)
    try:
        return bytes_to_digest(_file_to_bytes_generator(path), hash_algo).hex()
    except OSError as err:
        raise DensFieldIOError("could not read {}: {}".format(path, err)) from err


def tree_checksum(root: typing.Union[str, Path], hash_algo: HashAlgoType = DEFAULT_HASH_ALGO,
                  exclude: typing.Iterable[str] = ()) -> str:
    """Checksum of a directory tree: relative paths and file digests in sorted order

    Args:
        root: directory to checksum
        hash_algo: the hash algorithm used for both the files and the combined digest
        exclude: file names to leave out (e.g. logs whose content depends on wall time)

    Returns:
        hex digest that is stable across runs and machines
    """
    root = Path(root)
    if not root.is_dir():
        raise DensFieldIOError("{} is not a directory".format(root))
    excluded = set(exclude)
    files = sorted(path for path in root.rglob('*') if path.is_file() and path.name not in excluded)

    def _generator():
        for path in files:
            yield path.relative_to(root).as_posix().encode('utf-8') + b'\x00'
            yield bytes.fromhex(file_digest(path, hash_algo))

    return bytes_to_digest(_generator(), hash_algo).hex()
