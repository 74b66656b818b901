"""Brute-force transcription of the differential-code recurrences.

Works on whole 64-entry blocks with zeros left in place, walking backwards
over positions, and reduces with repeated add/subtract rather than ``%``.
"""

M = 2047


def reduce(x):
    while x > 1023:
        x -= M
    while x < -1023:
        x += M
    return x


def combine(a, b, add):
    return reduce(a + b if add else a - b)


def scramble(block, xi, ops):
    """``ops`` are booleans (True = add); returns (scrambled block, ops used)."""
    out = list(block)
    used = []
    ops = list(ops)
    prev = None
    for pos in range(63, -1, -1):
        if block[pos] == 0:
            continue
        add = ops[len(used)]
        other = xi if prev is None else prev
        value = combine(block[pos], other, add)
        if value == 0:
            add = not add
            value = combine(block[pos], other, add)
        out[pos] = value
        used.append(add)
        prev = value
    return out, used


def decode(block, xi, ops):
    out = list(block)
    prev = None
    k = 0
    for pos in range(63, -1, -1):
        if block[pos] == 0:
            continue
        other = xi if prev is None else prev
        out[pos] = combine(block[pos], other, ops[k])
        prev = block[pos]
        k += 1
    return out
