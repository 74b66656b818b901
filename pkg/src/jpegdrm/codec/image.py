"""In-memory model of an entropy-decoded JPEG."""

from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class Component:
    """One colour component and its quantized blocks.

    ``blocks`` has shape (blocks_h * blocks_w, 64): one row per block in
    raster order of the component's (MCU-padded) block grid, coefficients in
    zigzag order with actual (DPCM-accumulated) DC values.
    """

    id: int
    h: int
    v: int
    tq: int
    blocks_w: int
    blocks_h: int
    blocks: np.ndarray

    def __post_init__(self):
        self.blocks = np.asarray(self.blocks, dtype=np.int32)
        if self.blocks.shape != (self.blocks_w * self.blocks_h, 64):
            raise ValueError(
                f"component {self.id}: blocks shape {self.blocks.shape} does not match "
                f"{self.blocks_h}x{self.blocks_w} grid"
            )

    def copy(self):
        return Component(self.id, self.h, self.v, self.tq, self.blocks_w, self.blocks_h,
                         self.blocks.copy())


@dataclass(eq=False)
class CoefficientImage:
    """Quantized DCT coefficients of a baseline JPEG.

    ``quant_tables`` maps a table id (0..3) to 64 entries in zigzag order,
    matching how the coefficients are stored. ``app_segments`` holds raw
    (marker, payload) pairs passed through unchanged on serialization; they
    are not part of coefficient equality.
    """

    width: int
    height: int
    components: list
    quant_tables: dict
    app_segments: list = field(default_factory=list)

    @property
    def h_max(self):
        return max(c.h for c in self.components)

    @property
    def v_max(self):
        return max(c.v for c in self.components)

    @property
    def block_count(self):
        return sum(len(c.blocks) for c in self.components)

    def iter_blocks(self):
        """Yield (component_index, block_index, block_row) in key ordering.

        Rows are views: writing into them modifies the image.
        """
        for ci, comp in enumerate(self.components):
            for bi in range(len(comp.blocks)):
                yield ci, bi, comp.blocks[bi]

    def copy(self):
        return CoefficientImage(
            self.width,
            self.height,
            [c.copy() for c in self.components],
            {k: np.array(v, copy=True) for k, v in self.quant_tables.items()},
            list(self.app_segments),
        )

    def __eq__(self, other):
        if not isinstance(other, CoefficientImage):
            return NotImplemented
        if (self.width, self.height) != (other.width, other.height):
            return False
        if len(self.components) != len(other.components):
            return False
        for a, b in zip(self.components, other.components):
            if (a.id, a.h, a.v, a.tq, a.blocks_w, a.blocks_h) != (b.id, b.h, b.v, b.tq, b.blocks_w, b.blocks_h):
                return False
            if not np.array_equal(a.blocks, b.blocks):
                return False
        used = {c.tq for c in self.components}
        return all(
            t in other.quant_tables and np.array_equal(self.quant_tables[t], other.quant_tables[t])
            for t in used
        )


def block_grid(width, height, sampling):
    """Block-grid size (blocks_w, blocks_h) for each component.

    Single-component frames use the non-interleaved grid; multi-component
    frames are padded to whole MCUs.
    """
    if len(sampling) == 1:
        return [(-(-width // 8), -(-height // 8))]
    h_max = max(h for h, _ in sampling)
    v_max = max(v for _, v in sampling)
    mcus_x = -(-width // (8 * h_max))
    mcus_y = -(-height // (8 * v_max))
    return [(mcus_x * h, mcus_y * v) for h, v in sampling]
