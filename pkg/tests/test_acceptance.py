"""End-to-end acceptance checks, one test per criterion.

Each test appends a PASS/FAIL line to ``REPORT``; ``conftest.py`` prints the
lines in the terminal summary so they show up even with output captured.
"""

import random
import time

import numpy as np
import pytest

import oracle
from conftest import NATURAL, pil_decode
from jpegdrm import (
    BlockKey, DecodeKey, OpSign, ProducerKey, Registry, decode_block,
    decode_image, decode_to_rgb, issue_user_key, parse_jpeg,
    parse_key, psnr, register_user, scramble_block, scramble_image, serialize_jpeg,
    serialize_key, trace,
)
from jpegdrm.errors import FormatError

SUB, ADD = OpSign.SUB, OpSign.ADD
REPORT = []


def record(number, ok, detail):
    REPORT.append(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {detail}")
    return ok


def random_block(rng):
    """Random zero pattern; nonzeros uniform over [-1023, 1023] without 0."""
    density = rng.random()
    block = [0] * 64
    for pos in range(64):
        if rng.random() < density:
            v = rng.randint(1, 1023)
            block[pos] = v if rng.random() < 0.5 else -v
    return block


@pytest.fixture(scope="module")
def pipeline(natural_images):
    """Plain, trial and three fingerprinted copies per natural image, timed."""
    t0 = time.perf_counter()
    from jpegdrm import encode_rgb

    runs = {}
    for name in NATURAL:
        rgb = natural_images[name]
        plain = encode_rgb(rgb, 75)
        trial, producer = scramble_image(plain)
        users = {}
        for uid in ("alice", "bob", "carol"):
            key = issue_user_key(trial, producer, uid)
            users[uid] = decode_image(trial, key)
        runs[name] = dict(rgb=rgb, plain=plain, trial=trial, producer=producer, users=users)
    return runs, time.perf_counter() - t0


def test_1_scramble_golden_vector():
    t0 = time.perf_counter()
    e, _ = scramble_block([10, 5, 7, 3, 2, 8, 1, 9], 3, [SUB] * 8)
    elapsed = time.perf_counter() - t0
    ok = e == [-2, 12, -7, 14, -11, 13, -5, 6] and elapsed < 1
    assert record(1, ok, f"scramble -> {e} in {elapsed * 1e3:.2f} ms")


def test_2_decode_golden_vector():
    t0 = time.perf_counter()
    key = BlockKey(8, 2, ADD, (ADD,) * 7)
    d = decode_block([-2, 12, -7, 14, -11, 13, -5, 6], key)
    elapsed = time.perf_counter() - t0
    ok = d == [10, 5, 7, 3, 2, 8, 1, 8] and elapsed < 1
    assert record(2, ok, f"decode with offset 2 -> {d} in {elapsed * 1e3:.2f} ms")


def test_3_matched_key_losslessness():
    rng = random.Random(3)
    n, failures, flips = 10_000, 0, 0
    t0 = time.perf_counter()
    for _ in range(n):
        block = random_block(rng)
        p = [v for v in block if v]
        xi = rng.randint(-1023, 1023)
        ops = [OpSign(rng.getrandbits(1)) for _ in p]
        e, key = scramble_block(p, xi, ops)
        flips += sum(a != b for a, b in zip(key.ops(), ops))
        if decode_block(e, key.inverted()) != p:
            failures += 1
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 10 and flips > 0
    assert record(3, ok, f"{n} blocks, {failures} failures, {flips} operator flips, {elapsed:.2f} s")


def test_4_oracle_equivalence():
    rng = random.Random(4)
    n, mismatches = 10_000, 0
    for _ in range(n):
        length = rng.randint(1, 12)
        block = [0] * 64
        for pos in rng.sample(range(64), length):
            block[pos] = rng.choice([-1, 1]) * rng.randint(1, 1023)
        xi = rng.randint(-1023, 1023)
        bits = [bool(rng.getrandbits(1)) for _ in range(length)]
        p = [v for v in block if v]
        e, key = scramble_block(p, xi, [OpSign(b) for b in bits])
        e_ref, used = oracle.scramble(block, xi, bits)
        nonzero = [pos for pos in range(64) if block[pos]]
        if e != [e_ref[pos] for pos in nonzero] or [bool(o) for o in key.ops()] != used:
            mismatches += 1
            continue
        dxi = rng.randint(-1023, 1023)
        dbits = [bool(rng.getrandbits(1)) for _ in range(length)]
        dkey = BlockKey(length, dxi, OpSign(dbits[0]), tuple(OpSign(b) for b in dbits[1:]))
        d_ref = oracle.decode(e_ref, dxi, dbits)
        if decode_block(e, dkey) != [d_ref[pos] for pos in nonzero]:
            mismatches += 1
    assert record(4, mismatches == 0, f"{n} sequences against brute-force transcription, {mismatches} mismatches")


def test_5_structure_and_nonzero(pipeline):
    runs, _ = pipeline
    violations = 0
    checked = 0
    for run in runs.values():
        masks = [c.blocks != 0 for c in run["plain"].components]
        for image in (run["trial"], *run["users"].values()):
            for mask, comp in zip(masks, image.components):
                violations += int(np.count_nonzero(mask != (comp.blocks != 0)))
                checked += comp.blocks.size
    ok = violations == 0 and len(runs) >= 3
    assert record(5, ok, f"{len(runs)} images, {checked} coefficient positions, {violations} violations")


def test_6_psnr_properties(pipeline):
    runs, build_time = pipeline
    t0 = time.perf_counter()
    lines, ok_a, ok_b, ok_c = [], True, True, True
    for name, run in runs.items():
        ref = run["rgb"]
        plain = psnr(ref, decode_to_rgb(run["plain"])).psnr_db
        trial = psnr(ref, decode_to_rgb(run["trial"])).psnr_db
        worst = max(abs(plain - psnr(ref, decode_to_rgb(u)).psnr_db) for u in run["users"].values())
        ok_a &= worst <= 0.3
        ok_b &= trial <= plain - 3
        ok_c &= 24 <= plain <= 36
        lines.append(f"{name}: plain {plain:.2f} dB, trial {trial:.2f} dB, fingerprint gap {worst:.2f} dB")
    elapsed = build_time + time.perf_counter() - t0
    ok_t = elapsed < 30
    for text in lines:
        REPORT.append(f"      {text}")
    record("6a", ok_a, "fingerprinted PSNR within 0.3 dB of plain JPEG")
    record("6b", ok_b, "trial PSNR at least 3 dB below plain JPEG")
    record("6c", ok_c, "plain JPEG PSNR in [24, 36] dB")
    record("6t", ok_t, f"runtime {elapsed:.1f} s (limit 30 s)")
    assert ok_b and ok_c and ok_t, "criterion 6(b)/(c)/runtime"
    assert ok_a, "criterion 6(a): fingerprinted PSNR gap exceeds 0.3 dB"


def test_7_tracing(natural_jpegs):
    plain = natural_jpegs["chelsea"]
    trial, producer = scramble_image(plain, seed=7)
    registry = Registry.for_trial(trial)
    copies = {}
    for i in range(100):
        key = issue_user_key(trial, producer, f"user-{i:03d}")
        registry = register_user(registry, key, trial, producer, issued_at="2026-01-01T00:00:00+00:00")
        copies[key.user_id] = decode_image(trial, key)
    identified = sum(trace(img, registry).user_id == uid for uid, img in copies.items())
    trial_ok = not trace(trial, registry).matched

    rng = random.Random(7)
    caught = 0
    n_tamper = 200
    uids = sorted(copies)
    for _ in range(n_tamper):
        tampered = copies[rng.choice(uids)].copy()
        comp = tampered.components[rng.randrange(len(tampered.components))]
        bi, pos = rng.randrange(len(comp.blocks)), rng.randrange(64)
        comp.blocks[bi, pos] += rng.choice([-1, 1])
        caught += not trace(tampered, registry).matched
    widths = {len(r.reference_hash) * 8 for r in registry.users} | {len(registry.image_digest) * 8}
    ok = identified == 100 and trial_ok and caught == n_tamper and widths == {128}
    assert record(7, ok, f"identified {identified}/100, trial NO_MATCH={trial_ok}, "
                         f"tampers rejected {caught}/{n_tamper}, hash bits {sorted(widths)}")


def test_8_codec_losslessness(pipeline):
    runs, _ = pipeline
    files = 0
    fixed = 0
    decodable = 0
    for run in runs.values():
        for image in (run["plain"], run["trial"], *run["users"].values()):
            data = serialize_jpeg(image)
            parsed = parse_jpeg(data)
            files += 1
            fixed += parsed == image and parse_jpeg(serialize_jpeg(parsed)) == parsed
            try:
                pixels = pil_decode(data)
                decodable += pixels.shape == (image.height, image.width, 3)
            except Exception:
                pass
    ok = fixed == files and decodable == files
    assert record(8, ok, f"{files} files: {fixed} coefficient fixed points, {decodable} decoded by Pillow")


def test_9_key_file_canonicality(pipeline):
    runs, _ = pipeline
    run = runs["astronaut"]
    keys = [run["producer"], issue_user_key(run["trial"], run["producer"], "alice")]
    rng = random.Random(9)
    for _ in range(50):
        m = rng.randint(1, 64)
        keys.append(ProducerKey(rng.getrandbits(64), rng.randbytes(16), (
            BlockKey(m, rng.randint(-1023, 1023), OpSign(rng.getrandbits(1)),
                     tuple(OpSign(rng.getrandbits(1)) for _ in range(m - 1))),
            BlockKey(0), BlockKey(3, active=False),
        )))
        keys.append(DecodeKey(f"u{rng.random()}", rng.randbytes(16), (BlockKey(m, 1, ADD, (SUB,) * (m - 1)),)))
    round_trips = 0
    for key in keys:
        data = serialize_key(key)
        round_trips += parse_key(data) == key and serialize_key(parse_key(data)) == data

    sample = serialize_key(ProducerKey(1, bytes(16), (BlockKey(3, 2, ADD, (SUB, ADD)),)))
    mutants = [b"XCFE" + sample[4:], sample[:5] + b"\x07" + sample[6:]]
    mutants.append(sample[:42] + bytes([sample[42] | 0x80]) + sample[43:])
    rejected = 0
    for data in mutants:
        try:
            parse_key(data)
        except FormatError:
            rejected += 1
    ok = round_trips == len(keys) and rejected == len(mutants)
    assert record(9, ok, f"{round_trips}/{len(keys)} byte-identical round trips, "
                         f"{rejected}/{len(mutants)} mutated magic/kind/padding rejected")
