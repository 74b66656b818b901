# %% [markdown]
# # Coefficient-level JPEG round trip
#
# The codec decodes a baseline JPEG down to its quantized DCT blocks and
# writes them back without touching the pixels. Everything else in the
# package edits those blocks, so this round trip has to be exact.

# %%
import io

import numpy as np
from PIL import Image

from _images import photo
from jpegdrm import decode_to_rgb, encode_rgb, parse_jpeg, psnr, serialize_jpeg

rgb = photo("astronaut")
image = encode_rgb(rgb, quality=75)
print(image.width, image.height, [(c.h, c.v, c.blocks.shape) for c in image.components])

# %% Serialize and parse again: the blocks come back unchanged.
data = serialize_jpeg(image)
again = parse_jpeg(data)
print("bytes:", len(data), "identical coefficients:", again == image)

# %% A file written by another encoder goes through the same path.
buf = io.BytesIO()
Image.fromarray(rgb.pixels).save(buf, "JPEG", quality=75)
foreign = parse_jpeg(buf.getvalue())
rewritten = serialize_jpeg(foreign)
same = np.array_equal(np.asarray(Image.open(io.BytesIO(rewritten))),
                      np.asarray(Image.open(buf)))
print("Pillow file re-encoded, decodes to the same pixels:", same)

# %% Pixel quality of the quality-75 encode
print("plain JPEG:", psnr(rgb, decode_to_rgb(image)))
