"""Binary PPM (P6, maxval 255) reading and writing."""

from dataclasses import dataclass

import numpy as np

from ..errors import FormatError


@dataclass(eq=False)
class RgbImage:
    """8-bit RGB raster; ``pixels`` has shape (height, width, 3) and dtype uint8."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image dimensions must be positive, got {self.width}x{self.height}")
        pixels = np.asarray(self.pixels)
        if pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel array shape {pixels.shape} does not match {self.height}x{self.width}x3"
            )
        if pixels.dtype != np.uint8:
            if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
                raise ValueError("pixel samples must lie in [0, 255]")
            pixels = pixels.astype(np.uint8)
        self.pixels = pixels

    @classmethod
    def from_array(cls, array):
        array = np.asarray(array)
        return cls(array.shape[1], array.shape[0], array)

    def __eq__(self, other):
        if not isinstance(other, RgbImage):
            return NotImplemented
        return (
            self.width == other.width
            and self.height == other.height
            and np.array_equal(self.pixels, other.pixels)
        )


def _next_token(data, pos):
    # whitespace and '#' comments may separate header fields
    n = len(data)
    while pos < n:
        c = data[pos]
        if c == ord("#"):
            while pos < n and data[pos] not in (0x0A, 0x0D):
                pos += 1
        elif chr(c).isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not chr(data[pos]).isspace() and data[pos] != ord("#"):
        pos += 1
    if start == pos:
        raise FormatError("truncated PPM header", start)
    return data[start:pos], pos


def read_ppm(data):
    data = bytes(data)
    if data[:2] != b"P6":
        raise FormatError(f"unsupported PPM magic {data[:2]!r}, expected b'P6'", 0)
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError:
            raise FormatError(f"non-numeric PPM header field {token!r}", pos - len(token)) from None
    width, height, maxval = fields
    if width <= 0 or height <= 0:
        raise FormatError(f"invalid PPM dimensions {width}x{height}")
    if maxval != 255:
        raise FormatError(f"unsupported PPM maxval {maxval}, expected 255")
    if pos >= len(data) or not chr(data[pos]).isspace():
        raise FormatError("missing whitespace after PPM header", pos)
    pos += 1
    need = 3 * width * height
    payload = data[pos:pos + need]
    if len(payload) < need:
        raise FormatError(
            f"truncated PPM payload: expected {need} bytes, got {len(payload)}", pos + len(payload)
        )
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()
    return RgbImage(width, height, pixels)


def write_ppm(image):
    header = f"P6\n{image.width} {image.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(image.pixels, dtype=np.uint8).tobytes()
