import io

import numpy as np
import pytest
from PIL import Image

from jpegdrm import RgbImage, encode_rgb

NATURAL = ("astronaut", "coffee", "chelsea")


def natural_rgb(name, size=256):
    """Centre-cropped, resampled 8-bit RGB from scikit-image's bundled photos."""
    from skimage import data

    a = getattr(data, name)()
    s = min(a.shape[:2])
    y0 = (a.shape[0] - s) // 2
    x0 = (a.shape[1] - s) // 2
    a = a[y0:y0 + s, x0:x0 + s]
    a = np.asarray(Image.fromarray(a).resize((size, size), Image.LANCZOS))
    return RgbImage.from_array(a)


def pil_jpeg(pixels, **save_args):
    buf = io.BytesIO()
    Image.fromarray(np.asarray(pixels)).save(buf, "JPEG", **save_args)
    return buf.getvalue()


def pil_decode(data):
    return np.asarray(Image.open(io.BytesIO(data)).convert("RGB"))


@pytest.fixture(scope="session")
def natural_images():
    return {name: natural_rgb(name) for name in NATURAL}


@pytest.fixture(scope="session")
def natural_jpegs(natural_images):
    """Quality-75 coefficient images of the natural test photos."""
    return {name: encode_rgb(img, 75) for name, img in natural_images.items()}


@pytest.fixture(scope="session")
def small_image():
    rng = np.random.default_rng(7)
    base = np.linspace(0, 255, 40 * 56).reshape(40, 56)
    pixels = np.stack([base, base[::-1], np.full_like(base, 90)], axis=-1)
    pixels = pixels + rng.normal(0, 12, pixels.shape)
    return RgbImage.from_array(np.clip(pixels, 0, 255).astype(np.uint8))


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
