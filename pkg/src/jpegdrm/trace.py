"""User registry and exact-match traitor tracing on coefficient digests."""

import json
import os
import tempfile
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from .dcfe import decode_image
from .digest import DIGEST_SIZE, canonical_bytes, digest128, image_digest
from .errors import ConflictError, FormatError, IntegrityError, WrongContentError
from .keys import serialize_key

REGISTRY_VERSION = 1


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    reference_hash: bytes
    key_digest: bytes
    issued_at: str


@dataclass(frozen=True)
class Registry:
    image_digest: bytes
    users: tuple = ()
    version: int = REGISTRY_VERSION

    @classmethod
    def for_trial(cls, trial):
        return cls(image_digest(trial))

    def find(self, user_id):
        for record in self.users:
            if record.user_id == user_id:
                return record
        return None


@dataclass(frozen=True)
class TraceResult:
    user_id: str | None

    @property
    def matched(self):
        return self.user_id is not None

    def __str__(self):
        return f"MATCH {self.user_id}" if self.matched else "NO_MATCH"


def register_user(registry, key, trial, producer=None, issued_at=None):
    """Return a new registry with ``key``'s user and their reference hash.

    The reference hash is the digest of the producer-side simulation of the
    user's decode. ``producer``, when given, must be the key the trial was
    made with.
    """
    trial_digest = image_digest(trial)
    if registry.image_digest != trial_digest or key.image_digest != trial_digest:
        raise WrongContentError("registry, key and trial image are not bound to the same content")
    if producer is not None:
        if len(producer.block_keys) != len(key.block_keys) or any(
            u.m != p.m or u.chain_ops != p.inverted().chain_ops
            for u, p in zip(key.block_keys, producer.block_keys)
        ):
            raise WrongContentError("decode key was not issued from this producer key")
    if registry.find(key.user_id) is not None:
        raise ConflictError(f"user {key.user_id!r} is already registered")
    reference = digest128(canonical_bytes(decode_image(trial, key)))
    for record in registry.users:
        if record.reference_hash == reference:
            raise IntegrityError(
                f"reference hash of {key.user_id!r} collides with {record.user_id!r}"
            )
    if issued_at is None:
        issued_at = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
    record = UserRecord(key.user_id, reference, digest128(serialize_key(key)), issued_at)
    return replace(registry, users=registry.users + (record,))


def trace(suspect, registry):
    """Identify the registered user whose fingerprinted copy ``suspect`` is."""
    h = image_digest(suspect)
    for record in registry.users:
        if record.reference_hash == h:
            return TraceResult(record.user_id)
    return TraceResult(None)


def registry_to_json(registry):
    doc = {
        "version": registry.version,
        "image_digest": registry.image_digest.hex(),
        "users": [
            {
                "user_id": r.user_id,
                "reference_hash": r.reference_hash.hex(),
                "key_digest": r.key_digest.hex(),
                "issued_at": r.issued_at,
            }
            for r in registry.users
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def _hex_digest(value, what):
    try:
        raw = bytes.fromhex(value)
    except (TypeError, ValueError):
        raise FormatError(f"registry field {what} is not hex") from None
    if len(raw) != DIGEST_SIZE or value != raw.hex():
        raise FormatError(f"registry field {what} must be 32 lowercase hex digits")
    return raw


def registry_from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"registry is not valid JSON: {exc.msg}", exc.pos) from None
    if not isinstance(doc, dict) or doc.get("version") != REGISTRY_VERSION:
        raise FormatError("unsupported registry version")
    users = []
    seen = set()
    for i, entry in enumerate(doc.get("users", [])):
        try:
            record = UserRecord(
                str(entry["user_id"]),
                _hex_digest(entry["reference_hash"], f"users[{i}].reference_hash"),
                _hex_digest(entry["key_digest"], f"users[{i}].key_digest"),
                str(entry["issued_at"]),
            )
        except (KeyError, TypeError):
            raise FormatError(f"registry users[{i}] is missing fields") from None
        if record.user_id in seen:
            raise ConflictError(f"duplicate user {record.user_id!r} in registry")
        seen.add(record.user_id)
        users.append(record)
    if len({u.reference_hash for u in users}) != len(users):
        raise IntegrityError("registry contains colliding reference hashes")
    return Registry(_hex_digest(doc.get("image_digest"), "image_digest"), tuple(users))


def load_registry(path):
    with open(path, encoding="utf-8") as fh:
        return registry_from_json(fh.read())


def save_registry(registry, path):
    """Write ``registry`` to ``path`` by atomic whole-file replacement."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".registry-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(registry_to_json(registry))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
