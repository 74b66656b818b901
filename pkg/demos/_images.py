"""Shared test photo loader for the demo scripts."""

import numpy as np
from PIL import Image
from skimage import data

from jpegdrm import RgbImage


def photo(name="astronaut", size=256):
    a = getattr(data, name)()
    s = min(a.shape[:2])
    y0, x0 = (a.shape[0] - s) // 2, (a.shape[1] - s) // 2
    a = a[y0:y0 + s, x0:x0 + s]
    return RgbImage.from_array(np.asarray(Image.fromarray(a).resize((size, size), Image.LANCZOS)))
