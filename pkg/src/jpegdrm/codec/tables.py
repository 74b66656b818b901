"""Zigzag order and the Annex K quantization tables with IJG quality scaling."""

from dataclasses import dataclass

import numpy as np

# ZIGZAG[k] is the row-major index of the k-th coefficient in zigzag scan order.
ZIGZAG = np.array([
     0,  1,  8, 16,  9,  2,  3, 10,
    17, 24, 32, 25, 18, 11,  4,  5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13,  6,  7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
])

# Row-major order.
BASE_LUMA = np.array([
    16, 11, 10, 16,  24,  40,  51,  61,
    12, 12, 14, 19,  26,  58,  60,  55,
    14, 13, 16, 24,  40,  57,  69,  56,
    14, 17, 22, 29,  51,  87,  80,  62,
    18, 22, 37, 56,  68, 109, 103,  77,
    24, 35, 55, 64,  81, 104, 113,  92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103,  99,
])

BASE_CHROMA = np.array([
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
])


def zigzag_index(k):
    """Map zigzag position ``k`` to its (row, col) in the 8x8 block."""
    if not 0 <= k <= 63:
        raise ValueError(f"zigzag position must be in 0..63, got {k}")
    return divmod(int(ZIGZAG[k]), 8)


def to_zigzag(natural):
    """Reorder row-major coefficients (..., 64) into zigzag order."""
    return np.asarray(natural)[..., ZIGZAG]


def from_zigzag(zigzag):
    zigzag = np.asarray(zigzag)
    natural = np.empty_like(zigzag)
    natural[..., ZIGZAG] = zigzag
    return natural


@dataclass(frozen=True, eq=False)
class QualityTables:
    """Luma/chroma quantization tables in row-major order."""

    luma: np.ndarray
    chroma: np.ndarray


def _scale(base, scale):
    return np.clip((base * scale + 50) // 100, 1, 255)


def quality_to_tables(quality):
    if not isinstance(quality, (int, np.integer)) or not 1 <= quality <= 100:
        raise ValueError(f"quality must be an integer in 1..100, got {quality!r}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return QualityTables(_scale(BASE_LUMA, scale), _scale(BASE_CHROMA, scale))
