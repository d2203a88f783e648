"""Little-endian packing shared by the checkpoint and grid formats"""
import struct
import typing

import numpy as np

from densfield.core.exceptions import DensFieldParseError

_U32 = struct.Struct('<I')


def pack_u32(value: int) -> bytes:
    """
    >>> pack_u32(1)
    b'\\x01\\x00\\x00\\x00'
    """
    return _U32.pack(value)


def pack_text(text: str) -> bytes:
    """u32 byte length followed by the utf-8 bytes"""
    raw = text.encode('utf-8')
    return pack_u32(len(raw)) + raw


class ByteReader:
    """Cursor over a byte string that reports truncation and garbage with the offending offset"""

    def __init__(self, raw: bytes, path: typing.Any = '<bytes>'):
        self._raw = raw
        self._path = path
        self.offset = 0

    def fail(self, reason: str) -> DensFieldParseError:
        """An error for the current offset, to be raised by the caller"""
        return DensFieldParseError(self._path, self.offset, reason)

    @property
    def remaining(self) -> int:
        return len(self._raw) - self.offset

    def take(self, count: int, what: str) -> bytes:
        if count < 0 or self.remaining < count:
            raise self.fail("truncated {}, needed {} bytes, {} left".format(what, count, self.remaining))
        chunk = self._raw[self.offset:self.offset + count]
        self.offset += count
        return chunk

    def expect(self, magic: bytes) -> None:
        start = self.offset
        if self.take(len(magic), 'magic') != magic:
            self.offset = start
            raise self.fail("bad magic, expected {!r}".format(magic))

    def u32(self, what: str) -> int:
        return _U32.unpack(self.take(_U32.size, what))[0]

    def text(self, what: str) -> str:
        start = self.offset
        raw = self.take(self.u32(what + ' length'), what)
        try:
            return raw.decode('utf-8')
        except UnicodeDecodeError as err:
            self.offset = start
            raise self.fail("{} is not utf-8".format(what)) from err

    def float64s(self, count: int, what: str) -> np.ndarray:
        return np.frombuffer(self.take(8 * count, what), dtype='<f8').astype(np.float64)

    def finish(self) -> None:
        if self.remaining:
            raise self.fail("{} trailing bytes".format(self.remaining))
