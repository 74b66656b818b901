"""Pixel <-> quantized-coefficient conversion (colour transform, DCT, quantization)."""

import numpy as np

from .image import CoefficientImage, Component, block_grid
from .ppm import RgbImage
from .tables import from_zigzag, quality_to_tables, to_zigzag


def _dct_matrix():
    k = np.arange(8)
    m = np.cos((2 * k[None, :] + 1) * k[:, None] * np.pi / 16) * np.sqrt(2 / 8)
    m[0] /= np.sqrt(2)
    return m


DCT = _dct_matrix()


def rgb_to_ycbcr(rgb):
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = -0.168736 * r - 0.331264 * g + 0.5 * b + 128
    cr = 0.5 * r - 0.418688 * g - 0.081312 * b + 128
    return y, cb, cr


def ycbcr_to_rgb(y, cb, cr):
    cb = cb - 128.0
    cr = cr - 128.0
    r = y + 1.402 * cr
    g = y - 0.344136 * cb - 0.714136 * cr
    b = y + 1.772 * cb
    return np.clip(np.rint(np.stack([r, g, b], axis=-1)), 0, 255).astype(np.uint8)


def _pad(plane, height, width):
    ph, pw = height - plane.shape[0], width - plane.shape[1]
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _to_blocks(plane):
    h, w = plane.shape
    return plane.reshape(h // 8, 8, w // 8, 8).swapaxes(1, 2).reshape(-1, 8, 8)


def _from_blocks(blocks, blocks_w, blocks_h):
    return blocks.reshape(blocks_h, blocks_w, 8, 8).swapaxes(1, 2).reshape(blocks_h * 8, blocks_w * 8)


def forward_dct(blocks):
    return DCT @ blocks @ DCT.T


def inverse_dct(coefs):
    return DCT.T @ coefs @ DCT


def quantize(coefs, table):
    """Divide by ``table`` (row-major) and round half away from zero."""
    q = coefs.reshape(-1, 64) / np.asarray(table, dtype=np.float64)
    # snap away double-precision noise so exact halves stay exact
    q = np.round(q, 9)
    return (np.sign(q) * np.floor(np.abs(q) + 0.5)).astype(np.int32)


def encode_rgb(image, quality=75, subsampling="4:2:0"):
    """Compress an RgbImage to quantized coefficients."""
    if subsampling in ("420", "4:2:0"):
        chroma_factor = 2
    elif subsampling in ("444", "4:4:4"):
        chroma_factor = 1
    else:
        raise ValueError(f"unsupported subsampling {subsampling!r}")
    tables = quality_to_tables(quality)
    sampling = [(chroma_factor, chroma_factor), (1, 1), (1, 1)]
    grids = block_grid(image.width, image.height, sampling)
    luma_w, luma_h = grids[0]

    planes = [
        _pad(p, luma_h * 8, luma_w * 8) - 128.0 for p in rgb_to_ycbcr(image.pixels)
    ]
    if chroma_factor == 2:
        planes[1:] = [
            p.reshape(p.shape[0] // 2, 2, p.shape[1] // 2, 2).mean(axis=(1, 3)) for p in planes[1:]
        ]

    components = []
    for i, ((h, v), (bw, bh), plane) in enumerate(zip(sampling, grids, planes)):
        table = tables.luma if i == 0 else tables.chroma
        coefs = quantize(forward_dct(_to_blocks(plane)), table)
        components.append(Component(i + 1, h, v, 0 if i == 0 else 1, bw, bh, to_zigzag(coefs)))
    quant = {0: to_zigzag(tables.luma).astype(np.int32), 1: to_zigzag(tables.chroma).astype(np.int32)}
    return CoefficientImage(image.width, image.height, components, quant)


def component_samples(image, comp):
    """Reconstruct one component's 8-bit samples over its padded block grid."""
    qt = np.asarray(image.quant_tables[comp.tq], dtype=np.float64)
    coefs = from_zigzag(comp.blocks * qt).reshape(-1, 8, 8)
    samples = inverse_dct(coefs) + 128.0
    samples = np.clip(np.rint(samples), 0, 255)
    return _from_blocks(samples, comp.blocks_w, comp.blocks_h)


def decode_to_rgb(image):
    """Full pixel decode with nearest-neighbour chroma upsampling."""
    w, h = image.width, image.height
    planes = []
    for comp in image.components:
        samples = component_samples(image, comp)
        if len(image.components) > 1:
            rows = np.arange(h) * comp.v // image.v_max
            cols = np.arange(w) * comp.h // image.h_max
            samples = samples[rows[:, None], cols[None, :]]
        else:
            samples = samples[:h, :w]
        planes.append(samples)
    if len(planes) == 1:
        pixels = np.repeat(planes[0][..., None], 3, axis=-1).astype(np.uint8)
    else:
        pixels = ycbcr_to_rgb(*planes)
    return RgbImage(w, h, pixels)


