# %% [markdown]
# # Tracing a leaked copy
#
# The producer keeps a registry holding the 128-bit digest of each user's
# decoded coefficients. A leaked file is hashed and looked up; any edit to
# a single coefficient breaks the match.

# %%
from _images import photo
from jpegdrm import (
    Registry, decode_image, encode_rgb, issue_user_key, parse_jpeg, register_user,
    scramble_image, serialize_jpeg, trace,
)

plain = encode_rgb(photo("chelsea"), 75)
trial, producer = scramble_image(plain, seed=2024)
registry = Registry.for_trial(trial)
copies = {}
for user in ("alice", "bob", "carol", "dave"):
    key = issue_user_key(trial, producer, user)
    registry = register_user(registry, key, trial, producer)
    copies[user] = decode_image(trial, key)
for r in registry.users:
    print(r.user_id, r.reference_hash.hex())

# %% Bob's copy turns up online. It survives a file round trip unchanged.
leak = parse_jpeg(serialize_jpeg(copies["bob"]))
print("leaked copy:", trace(leak, registry))
print("trial image:", trace(trial, registry))

# %% Changing one coefficient by one step breaks the fingerprint.
tampered = leak.copy()
tampered.components[0].blocks[100, 3] += 1
print("tampered   :", trace(tampered, registry))
