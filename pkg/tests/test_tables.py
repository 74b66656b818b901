import numpy as np
import pytest

from jpegdrm import quality_to_tables, zigzag_index
from jpegdrm.codec.tables import BASE_CHROMA, BASE_LUMA, from_zigzag, to_zigzag


def diagonal_walk():
    """Zigzag order built by walking anti-diagonals, alternating direction."""
    order = []
    for s in range(15):
        cells = [(r, s - r) for r in range(8) if 0 <= s - r < 8]
        order += cells if s % 2 else cells[::-1]
    return order


def test_zigzag_matches_diagonal_walk():
    assert [zigzag_index(k) for k in range(64)] == diagonal_walk()


def test_zigzag_fixed_points():
    assert zigzag_index(0) == (0, 0)
    assert zigzag_index(1) == (0, 1)
    assert zigzag_index(2) == (1, 0)
    assert zigzag_index(63) == (7, 7)


def test_zigzag_is_bijection():
    assert len({zigzag_index(k) for k in range(64)}) == 64


@pytest.mark.parametrize("k", [-1, 64])
def test_zigzag_out_of_range(k):
    with pytest.raises(ValueError):
        zigzag_index(k)


def test_reorder_round_trip():
    x = np.arange(64)
    assert np.array_equal(from_zigzag(to_zigzag(x)), x)


def test_quality_50_is_identity():
    t = quality_to_tables(50)
    assert np.array_equal(t.luma, BASE_LUMA)
    assert np.array_equal(t.chroma, BASE_CHROMA)


def test_quality_75_luma_dc():
    assert quality_to_tables(75).luma[0] == 8


def test_quality_100_all_ones():
    t = quality_to_tables(100)
    assert (t.luma == 1).all() and (t.chroma == 1).all()


def test_low_quality_clamps_to_255():
    t = quality_to_tables(1)
    assert t.luma.max() == 255 and t.luma.min() >= 1


@pytest.mark.parametrize("q", [0, 101, 7.5])
def test_quality_out_of_range(q):
    with pytest.raises(ValueError):
        quality_to_tables(q)
