"""Canonical coefficient serialization and 128-bit content digests."""

import hashlib
import struct

import numpy as np

DIGEST_SIZE = 16


def canonical_bytes(image):
    """Position-exact byte form of an image's coefficients.

    Header: width, height (u32 LE), component count (u8), then h, v (u8 each)
    per component; followed by every block's 64 zigzag coefficients as int16
    LE, components in stored order and blocks in raster order.
    """
    parts = [struct.pack("<IIB", image.width, image.height, len(image.components))]
    parts += [bytes([c.h, c.v]) for c in image.components]
    parts += [np.ascontiguousarray(c.blocks, dtype="<i2").tobytes() for c in image.components]
    return b"".join(parts)


def digest128(data):
    """First 16 bytes of SHA-256."""
    return hashlib.sha256(data).digest()[:DIGEST_SIZE]


def image_digest(image):
    return digest128(canonical_bytes(image))
