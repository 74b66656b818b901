"""Scrambled trial JPEGs, per-user fingerprinting decode keys and traitor tracing."""

from .codec import (
    CoefficientImage, RgbImage, decode_to_rgb, encode_rgb, parse_jpeg, quality_to_tables,
    read_ppm, serialize_jpeg, write_ppm, zigzag_index,
)
from .dcfe import (
    BlockKey, DecodeKey, OpSign, ProducerKey, decode_block, decode_image, inverse_key, modsym,
    scramble_block, scramble_image,
)
from .digest import canonical_bytes, digest128, image_digest
from .keys import KeyGenConfig, SplitMix64, generate_block_keys, issue_user_key, parse_key, prng_next, serialize_key
from .metrics import PsnrReport, mse, psnr
from .trace import Registry, TraceResult, UserRecord, register_user, trace

__version__ = "0.1.0"

__all__ = [
    "BlockKey", "CoefficientImage", "DecodeKey", "KeyGenConfig", "OpSign", "ProducerKey",
    "PsnrReport", "Registry", "RgbImage", "SplitMix64", "TraceResult", "UserRecord",
    "canonical_bytes", "decode_block", "decode_image", "decode_to_rgb", "digest128",
    "encode_rgb", "generate_block_keys", "image_digest", "inverse_key", "issue_user_key",
    "modsym", "mse", "parse_jpeg", "parse_key", "prng_next", "psnr", "quality_to_tables",
    "read_ppm", "register_user", "scramble_block", "scramble_image", "serialize_jpeg",
    "serialize_key", "trace", "write_ppm", "zigzag_index",
]
