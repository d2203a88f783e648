# pylint: disable=missing-function-docstring
import numpy as np
import pytest

from densfield.core.binary import ByteReader, pack_text, pack_u32
from densfield.core.exceptions import DensFieldParseError


def test_reads_what_was_packed():
    raw = b'MAGIC' + pack_u32(7) + pack_text('heads.mv') + np.array([1.5, -2.0], dtype='<f8').tobytes()
    reader = ByteReader(raw)
    reader.expect(b'MAGIC')
    assert reader.u32('count') == 7
    assert reader.text('path') == 'heads.mv'
    assert reader.float64s(2, 'values').tolist() == [1.5, -2.0]
    reader.finish()


def test_bad_magic_points_at_the_start():
    with pytest.raises(DensFieldParseError) as info:
        ByteReader(b'XXXXX', 'file.bin').expect(b'DFLD1')
    assert info.value.offset == 0
    assert 'file.bin' in str(info.value)


def test_truncation_points_at_the_cursor():
    reader = ByteReader(pack_u32(1) + b'\x01')
    reader.u32('count')
    with pytest.raises(DensFieldParseError) as info:
        reader.u32('extent')
    assert info.value.offset == 4


def test_invalid_utf8_points_at_the_text():
    reader = ByteReader(pack_u32(0) + pack_u32(2) + b'\xff\xfe')
    reader.u32('count')
    with pytest.raises(DensFieldParseError) as info:
        reader.text('path')
    assert info.value.offset == 4


@pytest.mark.xfail(raises=DensFieldParseError, strict=True)
def test_trailing_bytes():
    ByteReader(b'\x00').finish()
