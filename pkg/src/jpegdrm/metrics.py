"""MSE / PSNR between RGB rasters."""

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PsnrReport:
    mse: float
    psnr_db: float  # math.inf when the rasters are identical

    @property
    def identical(self):
        return self.mse == 0

    def __str__(self):
        if self.identical:
            return "MSE 0.000000  PSNR IDENTICAL"
        return f"MSE {self.mse:.6f}  PSNR {self.psnr_db:.2f} dB"


def _pixels(a, b):
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"dimension mismatch: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    return a.pixels.astype(np.float64), b.pixels.astype(np.float64)


def mse(reference, test):
    """Mean squared error averaged jointly over all pixels and channels."""
    x, y = _pixels(reference, test)
    return float(np.mean((x - y) ** 2))


def psnr(reference, test):
    err = mse(reference, test)
    if err == 0:
        return PsnrReport(0.0, math.inf)
    return PsnrReport(err, 10 * math.log10(255.0 ** 2 / err))
