"""Keyed differential coding of quantized DCT blocks.

Scrambling replaces the nonzero coefficients ``p_0..p_n`` of a block (zigzag
order, zeros elided) by a chain of differences::

    e_n = p_n (op) xi
    e_i = p_i (op) e_{i+1}        for i = n-1 .. 0

Decoding runs the same recurrence over the scrambled values with the
inverse operators. Because every ``d_i`` for ``i < n`` depends only on the
scrambled ``e_i, e_{i+1}``, a decode key whose offset differs from the
producer's changes nothing but the last nonzero coefficient; that shift is
the per-user fingerprint.

All arithmetic is reduced with :func:`modsym` so results stay Huffman-codable.
"""

from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .digest import image_digest
from .errors import KeyAlignmentError, PreconditionError, WrongContentError

MODULUS = 2047
COEF_MAX = 1023


class OpSign(IntEnum):
    SUB = 0
    ADD = 1

    def inverse(self):
        return OpSign.ADD if self is OpSign.SUB else OpSign.SUB

    def apply(self, a, b):
        return a + b if self is OpSign.ADD else a - b


@dataclass(frozen=True)
class BlockKey:
    """Per-block key material.

    ``chain_ops[j]`` is the operator for the (j+1)-th chain step, i.e. for
    position ``m - 2 - j``. ``active=False`` marks a block excluded from
    scrambling; its ``m`` is still recorded for alignment checks.
    """

    m: int
    xi: int = 0
    xi_op: OpSign = OpSign.SUB
    chain_ops: tuple = ()
    active: bool = True

    def ops(self):
        return (self.xi_op, *self.chain_ops)

    def inverted(self):
        if not self.m or not self.active:
            return self
        return BlockKey(
            self.m,
            self.xi,
            self.xi_op.inverse(),
            tuple(op.inverse() for op in self.chain_ops),
        )


@dataclass(frozen=True)
class ProducerKey:
    seed: int
    image_digest: bytes
    block_keys: tuple


@dataclass(frozen=True)
class DecodeKey:
    user_id: str
    image_digest: bytes
    block_keys: tuple


def modsym(x):
    """Reduce ``x`` modulo 2047 into the symmetric range [-1023, 1023]."""
    return (x + COEF_MAX) % MODULUS - COEF_MAX


def nonzero_positions(block):
    return np.flatnonzero(block)


def _check_coefficients(values, what):
    for i, v in enumerate(values):
        if v == 0 or not -COEF_MAX <= v <= COEF_MAX:
            raise PreconditionError(
                f"{what}[{i}] = {v}: coefficients must be nonzero and within [-1023, 1023]"
            )


def scramble_block(p, xi, ops):
    """Scramble a nonzero-coefficient sequence.

    ``ops`` supplies the operator for the offset step first, then one per
    chain step. When an operator would produce 0 it is flipped; the returned
    BlockKey records the operators actually used.
    """
    p = [int(v) for v in p]
    _check_coefficients(p, "p")
    n = len(p)
    if not n:
        return [], BlockKey(0)
    ops = iter(ops)
    e = [0] * n

    op = OpSign(next(ops))
    value = modsym(op.apply(p[-1], xi))
    if value == 0:
        op = op.inverse()
        value = modsym(op.apply(p[-1], xi))
    e[-1] = value
    xi_op = op

    chain = []
    for i in range(n - 2, -1, -1):
        op = OpSign(next(ops))
        value = modsym(op.apply(p[i], e[i + 1]))
        if value == 0:
            op = op.inverse()
            value = modsym(op.apply(p[i], e[i + 1]))
        e[i] = value
        chain.append(op)
    return e, BlockKey(n, int(xi), xi_op, tuple(chain))


def decode_block(e, key):
    """Apply a decode key verbatim to a scrambled nonzero sequence."""
    e = [int(v) for v in e]
    n = len(e)
    if n != key.m:
        raise KeyAlignmentError(f"block has {n} nonzero coefficients, key expects {key.m}")
    if not n:
        return []
    _check_coefficients(e, "e")
    d = [0] * n
    d[-1] = modsym(key.xi_op.apply(e[-1], key.xi))
    for j, op in enumerate(key.chain_ops):
        i = n - 2 - j
        d[i] = modsym(op.apply(e[i], e[i + 1]))
    return d


def _check_alignment(image, block_keys):
    if len(block_keys) != image.block_count:
        raise KeyAlignmentError(
            f"key covers {len(block_keys)} blocks, image has {image.block_count}"
        )


def scramble_image(image, config=None, seed=1):
    """Scramble every selected block; returns (trial image, ProducerKey)."""
    from .keys import KeyGenConfig, generate_block_keys

    config = config or KeyGenConfig()
    initial = generate_block_keys(image, config, seed)
    out = image.copy()
    finalized = []
    for (ci, bi, block), bk in zip(out.iter_blocks(), initial):
        if not bk.m or not bk.active:
            finalized.append(bk)
            continue
        idx = nonzero_positions(block)
        try:
            e, fk = scramble_block(block[idx].tolist(), bk.xi, bk.ops())
        except PreconditionError as exc:
            raise PreconditionError(f"component {ci}, block {bi}: {exc}") from None
        block[idx] = e
        finalized.append(fk)
    return out, ProducerKey(int(seed), image_digest(image), tuple(finalized))


def inverse_key(producer, trial):
    """DecodeKey that exactly undoes ``producer`` on ``trial``."""
    return DecodeKey(
        "", image_digest(trial), tuple(bk.inverted() for bk in producer.block_keys)
    )


def decode_image(scrambled, key, check_digest=True):
    """Decode every keyed block of ``scrambled`` with ``key``."""
    if check_digest and key.image_digest != image_digest(scrambled):
        raise WrongContentError("decode key is bound to a different trial image")
    _check_alignment(scrambled, key.block_keys)
    out = scrambled.copy()
    for (ci, bi, block), bk in zip(out.iter_blocks(), key.block_keys):
        idx = nonzero_positions(block)
        if len(idx) != bk.m:
            raise KeyAlignmentError(
                f"component {ci}, block {bi}: {len(idx)} nonzero coefficients, key expects {bk.m}"
            )
        if bk.m and bk.active:
            block[idx] = decode_block(block[idx].tolist(), bk)
    return out


__all__ = [
    "BlockKey", "DecodeKey", "OpSign", "ProducerKey", "decode_block", "decode_image",
    "inverse_key", "modsym", "scramble_block", "scramble_image",
]
