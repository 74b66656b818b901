"""Key streams, user-key issuance and the ``.dcfek`` key file format."""

import struct
from dataclasses import dataclass, replace

import numpy as np

from .dcfe import BlockKey, DecodeKey, OpSign, ProducerKey, decode_image, inverse_key, modsym
from .digest import DIGEST_SIZE, digest128, image_digest
from .errors import FormatError, WrongContentError

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

MAGIC = b"DCFE"
VERSION = 1
KIND_PRODUCER = 0
KIND_USER = 1
EXCLUDED_FLAG = 0x8000


class SplitMix64:
    """SplitMix64 generator; identical seeds give identical streams everywhere."""

    def __init__(self, seed):
        self.state = seed & MASK64

    def next(self):
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n):
        return self.next() % n


def prng_next(state):
    """Functional form of one SplitMix64 step: returns (value, new_state)."""
    gen = SplitMix64(state)
    value = gen.next()
    return value, gen.state


@dataclass(frozen=True)
class KeyGenConfig:
    """Key-generation settings.

    ``xi_fixed=None`` draws a per-block offset in [-xi_range, xi_range].
    ``op_mode="sub"`` uses subtraction everywhere instead of drawing operators.
    """

    xi_fixed: int | None = None
    xi_range: int = 7
    delta_max: int = 2
    components: str = "all"
    op_mode: str = "random"

    def __post_init__(self):
        if self.delta_max < 1:
            raise ValueError("delta_max must be >= 1")
        if self.xi_range < 0:
            raise ValueError("xi_range must be >= 0")
        if self.xi_fixed is not None and not -1023 <= self.xi_fixed <= 1023:
            raise ValueError("fixed xi must lie in [-1023, 1023]")
        if self.components not in ("all", "luma"):
            raise ValueError(f"components must be 'all' or 'luma', got {self.components!r}")
        if self.op_mode not in ("random", "sub"):
            raise ValueError(f"op_mode must be 'random' or 'sub', got {self.op_mode!r}")

    @staticmethod
    def parse_xi_mode(text):
        """``"random"``/``"per-block"`` -> None, ``"fixed:<v>"`` -> v."""
        if text in ("random", "per-block"):
            return None
        if text.startswith("fixed:"):
            try:
                return int(text[6:])
            except ValueError:
                pass
        raise ValueError(f"xi mode must be 'fixed:<int>' or 'random', got {text!r}")


def generate_block_keys(image, config, seed):
    """Initial (pre-flip) BlockKeys for every block in key ordering."""
    rng = SplitMix64(seed)
    keys = []
    for ci, comp in enumerate(image.components):
        active = config.components == "all" or ci == 0
        counts = np.count_nonzero(comp.blocks, axis=1).tolist()
        for m in counts:
            if not active:
                keys.append(BlockKey(m, active=False))
                continue
            if not m:
                keys.append(BlockKey(0))
                continue
            if config.xi_fixed is None:
                xi = rng.below(2 * config.xi_range + 1) - config.xi_range
            else:
                xi = config.xi_fixed
            if config.op_mode == "sub":
                ops = [OpSign.SUB] * m
            else:
                ops = [OpSign(rng.next() & 1) for _ in range(m)]
            keys.append(BlockKey(m, xi, ops[0], tuple(ops[1:])))
    return keys


def user_seed(user_id):
    return int.from_bytes(digest128(user_id.encode("utf-8"))[:8], "little")


def _draw_delta(rng, delta_max):
    r = rng.below(2 * delta_max)
    return r - delta_max if r < delta_max else r - delta_max + 1


def issue_user_key(trial, producer, user_id, config=None):
    """Derive user ``user_id``'s fingerprinting decode key for ``trial``."""
    config = config or KeyGenConfig()
    if not user_id:
        raise ValueError("user_id must be nonempty")
    original = decode_image(trial, inverse_key(producer, trial))
    if image_digest(original) != producer.image_digest:
        raise WrongContentError("producer key does not belong to this trial image")

    rng = SplitMix64(user_seed(user_id))
    block_keys = []
    deltas = []
    for (_, _, block), bk in zip(original.iter_blocks(), producer.block_keys):
        if not bk.m or not bk.active:
            block_keys.append(bk)
            deltas.append(0)
            continue
        p_last = int(block[np.flatnonzero(block)[-1]])
        delta = _draw_delta(rng, config.delta_max)
        while modsym(p_last + delta) == 0:
            delta = _draw_delta(rng, config.delta_max)
        inv = bk.inverted()
        xi_u = modsym(bk.xi + delta) if inv.xi_op is OpSign.ADD else modsym(bk.xi - delta)
        block_keys.append(replace(inv, xi=xi_u))
        deltas.append(delta)

    key = DecodeKey(user_id, image_digest(trial), tuple(block_keys))
    _verify_issued(trial, original, key, deltas)
    return key


def _verify_issued(trial, original, key, deltas):
    decoded = decode_image(trial, key)
    for (ci, bi, d), (_, _, p), delta in zip(decoded.iter_blocks(), original.iter_blocks(), deltas):
        idx = np.flatnonzero(p)
        diff = np.flatnonzero(d != p)
        if not len(idx):
            ok = not len(diff)
        elif not delta:
            ok = not len(diff)
        else:
            last = idx[-1]
            ok = (
                diff.tolist() == [last]
                and d[last] != 0
                and int(d[last]) == modsym(int(p[last]) + delta)
            )
        if not ok:
            raise RuntimeError(f"issued key fails replay at component {ci}, block {bi}")


def serialize_key(key):
    """Byte-exact ``.dcfek`` encoding (little-endian throughout)."""
    if isinstance(key, ProducerKey):
        kind, seed, uid = KIND_PRODUCER, key.seed, b""
    else:
        kind, seed, uid = KIND_USER, 0, key.user_id.encode("utf-8")
    out = bytearray(MAGIC)
    out += bytes([VERSION, kind, 0, 0])
    out += struct.pack("<Q", seed & MASK64)
    out += bytes(key.image_digest)
    out += struct.pack("<H", len(uid)) + uid
    out += struct.pack("<I", len(key.block_keys))
    for bk in key.block_keys:
        if not bk.active:
            out += struct.pack("<H", EXCLUDED_FLAG | bk.m)
            continue
        out += struct.pack("<H", bk.m)
        if not bk.m:
            continue
        out += struct.pack("<h", bk.xi)
        bits = int(bk.xi_op)
        for j, op in enumerate(bk.chain_ops, start=1):
            bits |= int(op) << j
        out += bits.to_bytes((bk.m + 7) // 8, "little")
    return bytes(out)


class _Cursor:
    def __init__(self, data):
        self.data = data
        self.pos = 0

    def take(self, n, what):
        if self.pos + n > len(self.data):
            raise FormatError(f"truncated key file while reading {what}", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk


def parse_key(data):
    """Inverse of :func:`serialize_key`; rejects non-canonical encodings."""
    cur = _Cursor(bytes(data))
    if cur.take(4, "magic") != MAGIC:
        raise FormatError("bad key file magic", 0)
    version, kind, r0, r1 = cur.take(4, "header")
    if version != VERSION:
        raise FormatError(f"unsupported key file version {version}", 4)
    if kind not in (KIND_PRODUCER, KIND_USER):
        raise FormatError(f"unknown key kind {kind}", 5)
    if r0 or r1:
        raise FormatError("reserved header bytes must be zero", 6)
    (seed,) = struct.unpack("<Q", cur.take(8, "seed"))
    digest = cur.take(DIGEST_SIZE, "image digest")
    (uid_len,) = struct.unpack("<H", cur.take(2, "user id length"))
    uid_at = cur.pos
    uid_raw = cur.take(uid_len, "user id")
    if kind == KIND_PRODUCER and uid_len:
        raise FormatError("producer key carries a user id", uid_at)
    if kind == KIND_USER and seed:
        raise FormatError("user key seed field must be zero", 8)
    try:
        user_id = uid_raw.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError("user id is not valid UTF-8", uid_at) from None
    (count,) = struct.unpack("<I", cur.take(4, "block count"))
    blocks = []
    for _ in range(count):
        at = cur.pos
        (m,) = struct.unpack("<H", cur.take(2, "block length"))
        active = not m & EXCLUDED_FLAG
        m &= ~EXCLUDED_FLAG
        if m > 64:
            raise FormatError(f"block nonzero count {m} exceeds 64", at)
        if not active:
            blocks.append(BlockKey(m, active=False))
            continue
        if not m:
            blocks.append(BlockKey(0))
            continue
        (xi,) = struct.unpack("<h", cur.take(2, "xi"))
        if not -1023 <= xi <= 1023:
            raise FormatError(f"xi {xi} outside [-1023, 1023]", at + 2)
        nbytes = (m + 7) // 8
        bits_at = cur.pos
        bits = int.from_bytes(cur.take(nbytes, "operator bits"), "little")
        if bits >> m:
            raise FormatError("nonzero padding bits in operator field", bits_at)
        chain = tuple(OpSign((bits >> j) & 1) for j in range(1, m))
        blocks.append(BlockKey(m, xi, OpSign(bits & 1), chain))
    if cur.pos != len(cur.data):
        raise FormatError("trailing bytes after key data", cur.pos)
    if kind == KIND_PRODUCER:
        return ProducerKey(seed, digest, tuple(blocks))
    return DecodeKey(user_id, digest, tuple(blocks))
