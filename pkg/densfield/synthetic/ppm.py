"""Binary PPM (P6, maxval 255) images"""
import re
import typing
from pathlib import Path

import numpy as np

from densfield.core.constants import PPM_MAGIC, PPM_MAXVAL
from densfield.core.exceptions import DensFieldContractViolation, DensFieldIOError, DensFieldParseError

# magic, width, height and maxval separated by whitespace and comments, then exactly one whitespace byte
_TOKEN = re.compile(rb'(?:\s|#[^\n]*\n)*(\S+)')


def encode_ppm(image: np.ndarray) -> bytes:
    """(H, W, 3) values in [0, 1] rounded to 8 bits

    >>> encode_ppm(np.ones((1, 2, 3)))
    b'P6\\n2 1\\n255\\n\\xff\\xff\\xff\\xff\\xff\\xff'
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise DensFieldContractViolation("PPM images are (H, W, 3), got {}".format(image.shape))
    pixels = np.round(np.clip(image, 0.0, 1.0) * PPM_MAXVAL).astype(np.uint8)
    header = b'%s\n%d %d\n%d\n' % (PPM_MAGIC, image.shape[1], image.shape[0], PPM_MAXVAL)
    return header + pixels.tobytes()


def decode_ppm(raw: bytes, path: typing.Any = '<bytes>') -> np.ndarray:
    """(H, W, 3) float image in [0, 1]"""
    offset = 0
    tokens = []
    for what in ('magic', 'width', 'height', 'maxval'):
        match = _TOKEN.match(raw, offset)
        if match is None:
            raise DensFieldParseError(path, offset, "truncated header, missing {}".format(what))
        tokens.append((match.start(1), match.group(1)))
        offset = match.end(1)
    (_, magic), *numbers = tokens
    if magic != PPM_MAGIC:
        raise DensFieldParseError(path, 0, "bad magic {!r}, expected {!r}".format(magic, PPM_MAGIC))
    values = []
    for start, token in numbers:
        if not token.isdigit():
            raise DensFieldParseError(path, start, "expected a number, got {!r}".format(token))
        values.append(int(token))
    width, height, maxval = values
    if maxval != PPM_MAXVAL or width < 1 or height < 1:
        raise DensFieldParseError(path, numbers[0][0], "unsupported {}x{} image with maxval {}".format(
            width, height, maxval))
    if offset >= len(raw) or not raw[offset:offset + 1].isspace():
        raise DensFieldParseError(path, offset, "missing whitespace before pixel data")
    offset += 1
    expected = width * height * 3
    if len(raw) - offset != expected:
        raise DensFieldParseError(path, min(len(raw), offset + expected), "expected {} pixel bytes, found {}".format(
            expected, len(raw) - offset))
    pixels = np.frombuffer(raw, dtype=np.uint8, offset=offset).reshape(height, width, 3)
    return pixels.astype(np.float64) / PPM_MAXVAL


def write_ppm(path, image: np.ndarray) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(encode_ppm(image))
    except OSError as err:
        raise DensFieldIOError("could not write image {}: {}".format(path, err)) from err


def read_ppm(path) -> np.ndarray:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise DensFieldIOError("could not read image {}: {}".format(path, err)) from err
    return decode_ppm(raw, path)
