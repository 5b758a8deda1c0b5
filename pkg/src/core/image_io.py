# FILE: src/core/image_io.py
# Binary Netpbm (P5 gray / P6 RGB, maxval 255) reading and writing plus the
# HSV value-channel extraction applied before feature detection.

import logging
from pathlib import Path
from typing import Union

import numpy as np

from src.core.error_handler import ImageFormatError, MVRPIOError
from src.models.images import GrayImage, RgbImage

logger = logging.getLogger("ImageIO")

_WHITESPACE = b" \t\n\r\v\f"


def v_channel(img: RgbImage) -> GrayImage:
    """HSV value channel: max(r, g, b) per pixel"""
    return GrayImage(img.pixels.max(axis=2))


def as_gray(img: Union[RgbImage, GrayImage]) -> GrayImage:
    return img if isinstance(img, GrayImage) else v_channel(img)


def _read_header(data: bytes, count: int):
    """Return the first `count` header tokens and the payload offset

    Comments run from `#` to the end of the line. Exactly one whitespace byte
    separates the last token from the payload.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and (data[pos] in _WHITESPACE or data[pos] == ord("#")):
            if data[pos] == ord("#"):
                while pos < n and data[pos] not in b"\n\r":
                    pos += 1
            else:
                pos += 1
        start = pos
        while pos < n and data[pos] not in _WHITESPACE and data[pos] != ord("#"):
            pos += 1
        if start == pos:
            raise ImageFormatError("Truncated Netpbm header")
        tokens.append(data[start:pos])
    if pos >= n or data[pos] not in _WHITESPACE:
        raise ImageFormatError("Missing whitespace after Netpbm header")
    return tokens, pos + 1


def read_image(path) -> Union[RgbImage, GrayImage]:
    """Read a binary PGM (P5) or PPM (P6) file with maxval 255

    Raises:
        MVRPIOError: file cannot be read
        ImageFormatError: bad magic, maxval other than 255, or truncated payload
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise MVRPIOError(f"Cannot read image {path}: {e}") from e

    magic = data[:2]
    if magic not in (b"P5", b"P6"):
        raise ImageFormatError(f"{path}: unsupported magic {magic!r}, expected P5 or P6")
    channels = 1 if magic == b"P5" else 3

    tokens, offset = _read_header(data[2:], 3)
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError:
        raise ImageFormatError(f"{path}: non-numeric header fields {tokens}") from None
    if width <= 0 or height <= 0:
        raise ImageFormatError(f"{path}: invalid size {width}x{height}")
    if maxval != 255:
        raise ImageFormatError(f"{path}: maxval {maxval} not supported, expected 255")

    expected = width * height * channels
    payload = data[2 + offset:2 + offset + expected]
    if len(payload) < expected:
        raise ImageFormatError(f"{path}: truncated payload, {len(payload)} of {expected} bytes")

    pixels = np.frombuffer(payload, dtype=np.uint8)
    if channels == 1:
        return GrayImage(pixels.reshape(height, width))
    return RgbImage(pixels.reshape(height, width, 3))


def write_image(img: Union[RgbImage, GrayImage], path) -> None:
    """Write `P5\\n<w> <h>\\n255\\n<payload>` (P6 for RGB images)

    Raises:
        MVRPIOError: file cannot be written
    """
    magic = b"P5" if isinstance(img, GrayImage) else b"P6"
    header = magic + f"\n{img.width} {img.height}\n255\n".encode("ascii")
    path = Path(path)
    try:
        path.write_bytes(header + img.pixels.tobytes())
    except OSError as e:
        raise MVRPIOError(f"Cannot write image {path}: {e}") from e
    logger.debug(f"Wrote {magic.decode()} image {img.width}x{img.height} to {path}")
