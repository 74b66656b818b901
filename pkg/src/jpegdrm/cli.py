"""``dcfe`` command line: encode, scramble, issue, decode, trace, psnr, inspect."""

import argparse
import os
import sys

import numpy as np

from . import codec
from .dcfe import ProducerKey, decode_image, inverse_key, scramble_image
from .digest import canonical_bytes, digest128, image_digest
from .errors import (
    CodingRangeError, ConflictError, FormatError, IntegrityError, KeyAlignmentError,
    PreconditionError, WrongContentError,
)
from .keys import KeyGenConfig, issue_user_key, parse_key, serialize_key
from .metrics import psnr
from .trace import Registry, UserRecord, register_user, registry_from_json, save_registry, trace

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FORMAT = 2
EXIT_NO_MATCH = 3
EXIT_PRECONDITION = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


class _FileError(Exception):
    """Wraps a library error with the path it concerns."""

    def __init__(self, path, exc):
        super().__init__(f"{path}: {exc}")
        self.exc = exc


def _read(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise _FileError(path, FormatError(f"cannot read file ({exc.strerror})")) from None


def _write(path, data):
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _load(path, parser, data=None):
    if data is None:
        data = _read(path)
    try:
        return parser(data)
    except FormatError as exc:
        raise _FileError(path, exc) from None


def _load_raster(path):
    data = _read(path)
    if data[:2] == b"\xff\xd8":
        return codec.decode_to_rgb(_load(path, codec.parse_jpeg, data))
    return _load(path, codec.read_ppm, data)


def _config(args):
    try:
        xi = KeyGenConfig.parse_xi_mode(getattr(args, "xi_mode", "random"))
        return KeyGenConfig(
            xi_fixed=xi,
            delta_max=getattr(args, "delta_max", 2),
            components=getattr(args, "components", "all"),
            op_mode=getattr(args, "ops", "random"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_encode(args, out):
    image = _load(args.input, codec.read_ppm)
    try:
        coefs = codec.encode_rgb(image, args.quality, args.subsampling)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write(args.out, codec.serialize_jpeg(coefs))
    print(f"encoded {args.input} -> {args.out} ({image.width}x{image.height}, "
          f"quality {args.quality}, {args.subsampling})", file=out)
    return EXIT_OK


def cmd_scramble(args, out):
    image = _load(args.input, codec.parse_jpeg)
    trial, key = scramble_image(image, _config(args), args.seed)
    _write(args.out, codec.serialize_jpeg(trial))
    _write(args.key_out, serialize_key(key))
    keyed = sum(1 for bk in key.block_keys if bk.m and bk.active)
    print(f"scrambled {keyed}/{len(key.block_keys)} blocks -> {args.out}; "
          f"producer key -> {args.key_out}", file=out)
    return EXIT_OK


def _producer_key(path):
    key = _load(path, parse_key)
    if not isinstance(key, ProducerKey):
        raise _FileError(path, FormatError("expected a producer key"))
    return key


def cmd_issue(args, out):
    trial = _load(args.trial, codec.parse_jpeg)
    producer = _producer_key(args.producer_key)
    config = _config(args)
    try:
        key = issue_user_key(trial, producer, args.user_id, config)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if os.path.exists(args.registry):
        registry = _load(args.registry, _registry_from_bytes)
    else:
        registry = Registry.for_trial(trial)
    registry = register_user(registry, key, trial, producer)
    _write(args.key_out, serialize_key(key))
    save_registry(registry, args.registry)
    print(f"issued key for {args.user_id} -> {args.key_out}; "
          f"registry {args.registry} now has {len(registry.users)} users", file=out)
    return EXIT_OK


def _registry_from_bytes(data):
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise FormatError("registry is not UTF-8") from None
    return registry_from_json(text)


def cmd_decode(args, out):
    trial = _load(args.input, codec.parse_jpeg)
    key = _load(args.key, parse_key)
    if isinstance(key, ProducerKey):
        decoded = decode_image(trial, inverse_key(key, trial))
        if image_digest(decoded) != key.image_digest:
            raise WrongContentError("producer key does not belong to this trial image")
        who = "producer (exact inverse)"
    else:
        decoded = decode_image(trial, key)
        who = f"user {key.user_id}"
    _write(args.out, codec.serialize_jpeg(decoded))
    print(f"decoded {args.input} with {who} key -> {args.out}", file=out)
    return EXIT_OK


def cmd_trace(args, out):
    suspect = _load(args.input, codec.parse_jpeg)
    registry = _load(args.registry, _registry_from_bytes)
    if args.recompute:
        if not (args.trial and args.producer_key):
            raise UsageError("--recompute requires --trial and --producer-key")
        registry = _audit(registry, args, out)
    result = trace(suspect, registry)
    print(str(result), file=out)
    return EXIT_OK if result.matched else EXIT_NO_MATCH


def _audit(registry, args, out):
    """Re-issue every registered key and rebuild reference hashes from scratch."""
    trial = _load(args.trial, codec.parse_jpeg)
    producer = _producer_key(args.producer_key)
    if image_digest(trial) != registry.image_digest:
        raise WrongContentError("registry is bound to a different trial image")
    config = _config(args)
    records = []
    for record in registry.users:
        key = issue_user_key(trial, producer, record.user_id, config)
        reference = digest128(canonical_bytes(decode_image(trial, key)))
        key_ok = digest128(serialize_key(key)) == record.key_digest
        hash_ok = reference == record.reference_hash
        status = "ok" if key_ok and hash_ok else "MISMATCH"
        print(f"audit {record.user_id}: key {'ok' if key_ok else 'differs'}, "
              f"reference {'ok' if hash_ok else 'differs'} [{status}]", file=out)
        records.append(UserRecord(record.user_id, reference, record.key_digest, record.issued_at))
    return Registry(registry.image_digest, tuple(records), registry.version)


def cmd_psnr(args, out):
    ref = _load_raster(args.ref)
    test = _load_raster(args.test)
    try:
        report = psnr(ref, test)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(str(report), file=out)
    return EXIT_OK


def cmd_inspect(args, out):
    image = _load(args.input, codec.parse_jpeg)
    print(f"{args.input}: {image.width}x{image.height}, {len(image.components)} component(s)", file=out)
    print(f"digest {image_digest(image).hex()}", file=out)
    for comp in image.components:
        counts = np.count_nonzero(comp.blocks, axis=1)
        nz_blocks = int(np.count_nonzero(counts))
        print(
            f"component {comp.id}: sampling {comp.h}x{comp.v}, quant table {comp.tq}, "
            f"{comp.blocks_w}x{comp.blocks_h} blocks, {nz_blocks} nonzero blocks, "
            f"mean nonzero/block {counts.mean():.2f}, "
            f"coefficient range [{int(comp.blocks.min())}, {int(comp.blocks.max())}]",
            file=out,
        )
    for tq, table in sorted(image.quant_tables.items()):
        print(f"quant table {tq} (zigzag): {' '.join(str(int(v)) for v in table)}", file=out)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="dcfe", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("encode", help="compress a PPM raster to baseline JPEG")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--quality", type=int, default=75)
    s.add_argument("--subsampling", choices=["444", "420"], default="420")
    s.set_defaults(func=cmd_encode)

    s = sub.add_parser("scramble", help="make a trial JPEG and its producer key")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--key-out", required=True)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--xi-mode", default="random", help="fixed:<v> or random")
    s.add_argument("--components", choices=["all", "luma"], default="all")
    s.add_argument("--ops", choices=["random", "sub"], default="random",
                   help="draw producer operators at random or use subtraction throughout")
    s.set_defaults(func=cmd_scramble)

    s = sub.add_parser("issue", help="issue a user's fingerprinting decode key")
    s.add_argument("--trial", required=True)
    s.add_argument("--producer-key", required=True)
    s.add_argument("--user-id", required=True)
    s.add_argument("--key-out", required=True)
    s.add_argument("--registry", required=True)
    s.add_argument("--delta-max", type=int, default=2)
    s.set_defaults(func=cmd_issue)

    s = sub.add_parser("decode", help="decode a trial JPEG with a key")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--key", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_decode)

    s = sub.add_parser("trace", help="identify the user a suspect JPEG came from")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--registry", required=True)
    s.add_argument("--recompute", action="store_true")
    s.add_argument("--trial")
    s.add_argument("--producer-key")
    s.add_argument("--delta-max", type=int, default=2)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("psnr", help="PSNR of a JPEG or PPM against a reference PPM")
    s.add_argument("--ref", required=True)
    s.add_argument("--test", required=True)
    s.set_defaults(func=cmd_psnr)

    s = sub.add_parser("inspect", help="print block and coefficient statistics")
    s.add_argument("--in", dest="input", required=True)
    s.set_defaults(func=cmd_inspect)
    return p


def run_cli(argv, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "delta_max", 2) < 1:
            raise UsageError("--delta-max must be >= 1")
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except _FileError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FORMAT if isinstance(exc.exc, FormatError) else EXIT_PRECONDITION
    except FormatError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_FORMAT
    except (CodingRangeError, PreconditionError, KeyAlignmentError, WrongContentError,
            ConflictError, IntegrityError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PRECONDITION


def main():
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
