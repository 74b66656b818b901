# %% [markdown]
# # The differential chain on one block
#
# A block whose nonzero zigzag coefficients are 10 5 7 3 2 8 1 9, offset 3
# and subtraction at every step. The chain runs from the last nonzero
# coefficient back to DC, each value minus the already scrambled neighbour.

# %%
from jpegdrm import BlockKey, OpSign, decode_block, scramble_block

p = [10, 5, 7, 3, 2, 8, 1, 9]
e, key = scramble_block(p, 3, [OpSign.SUB] * len(p))
print("original :", p)
print("scrambled:", e)

# %% The exact inverse key adds instead of subtracting, with the same offset.
print("inverse  :", decode_block(e, key.inverted()))

# %% A user key uses offset 2: only the last coefficient moves, 9 -> 8.
user = BlockKey(len(p), 2, OpSign.ADD, (OpSign.ADD,) * (len(p) - 1))
print("user     :", decode_block(e, user))

# %% [markdown]
# Every earlier position depends only on two scrambled values, so a wrong
# offset cannot spread. Zero positions are never touched and no nonzero ever
# becomes zero: when a step would give 0 the operator is flipped and the
# flip is kept in the key.

# %%
e, key = scramble_block([4, 3], 3, [OpSign.SUB, OpSign.SUB])
print("3 - 3 would be zero; scrambled:", e, "operators used:", [op.name for op in key.ops()])
