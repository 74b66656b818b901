"""Baseline JPEG codec operating on quantized DCT coefficients."""

from .image import CoefficientImage, Component, block_grid
from .jpeg import parse_jpeg, serialize_jpeg
from .ppm import RgbImage, read_ppm, write_ppm
from .tables import QualityTables, from_zigzag, quality_to_tables, to_zigzag, zigzag_index
from .transform import decode_to_rgb, encode_rgb

__all__ = [
    "CoefficientImage", "Component", "QualityTables", "RgbImage", "block_grid",
    "decode_to_rgb", "encode_rgb", "from_zigzag", "parse_jpeg", "quality_to_tables",
    "read_ppm", "serialize_jpeg", "to_zigzag", "write_ppm", "zigzag_index",
]
