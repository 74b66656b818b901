"""Huffman table construction (T.81 Annex K.2) and bit-level I/O."""


from ..errors import JpegDecodeError


def optimal_table(freq):
    """Build (bits, huffval) from a symbol->count mapping.

    Follows the Annex K.2 procedure: code lengths are limited to 16 bits and
    the all-ones codeword is reserved.
    """
    counts = [0] * 257
    for sym, n in freq.items():
        counts[sym] = n
    counts[256] = 1
    codesize = [0] * 257
    others = [-1] * 257
    while True:
        v1 = v2 = -1
        for i, c in enumerate(counts):
            # ties go to the larger symbol value
            if c and (v1 < 0 or c <= counts[v1]):
                v1 = i
        for i, c in enumerate(counts):
            if c and i != v1 and (v2 < 0 or c <= counts[v2]):
                v2 = i
        if v2 < 0:
            break
        counts[v1] += counts[v2]
        counts[v2] = 0
        codesize[v1] += 1
        while others[v1] >= 0:
            v1 = others[v1]
            codesize[v1] += 1
        others[v1] = v2
        codesize[v2] += 1
        while others[v2] >= 0:
            v2 = others[v2]
            codesize[v2] += 1

    bits = [0] * 33
    for size in codesize:
        if size:
            bits[size] += 1
    for i in range(32, 16, -1):
        while bits[i] > 0:
            j = i - 2
            while bits[j] == 0:
                j -= 1
            bits[i] -= 2
            bits[i - 1] += 1
            bits[j + 1] += 2
            bits[j] -= 1
    i = 16
    while bits[i] == 0:
        i -= 1
    bits[i] -= 1

    huffval = sorted((size, sym) for sym, size in enumerate(codesize) if size and sym != 256)
    return bits[1:17], [sym for _, sym in huffval]


def canonical_codes(bits, huffval):
    """Map symbol -> (code, length) per Annex C."""
    codes = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            codes[huffval[k]] = (code, length)
            code += 1
            k += 1
        code <<= 1
    return codes


def lookup_table(bits, huffval):
    """65536-entry table indexed by the next 16 bits: (symbol, length) or None."""
    table = [None] * 65536
    for sym, (code, length) in canonical_codes(bits, huffval).items():
        start = code << (16 - length)
        span = 1 << (16 - length)
        table[start:start + span] = [(sym, length)] * span
    return table


def category(value):
    return int(abs(value)).bit_length()


class BitWriter:
    """MSB-first bit packer with 0xFF byte stuffing."""

    def __init__(self):
        self.out = bytearray()
        self._acc = 0
        self._n = 0

    def write(self, value, length):
        if not length:
            return
        self._acc = (self._acc << length) | (value & ((1 << length) - 1))
        self._n += length
        while self._n >= 8:
            self._n -= 8
            byte = (self._acc >> self._n) & 0xFF
            self.out.append(byte)
            if byte == 0xFF:
                self.out.append(0)
        self._acc &= (1 << self._n) - 1

    def flush(self):
        if self._n:
            self.write((1 << (8 - self._n)) - 1, 8 - self._n)
        return bytes(self.out)


class BitReader:
    """Reads an unstuffed entropy-coded segment.

    ``offsets[i]`` is the file offset of unstuffed byte ``i`` and is only used
    for error reporting.
    """

    def __init__(self, data, offsets):
        self.bits = bin(int.from_bytes(b"\x01" + bytes(data), "big"))[3:]
        self.offsets = offsets
        self.pos = 0

    def offset(self):
        if not self.offsets:
            return None
        return self.offsets[min(self.pos // 8, len(self.offsets) - 1)]

    def decode(self, table):
        chunk = self.bits[self.pos:self.pos + 16]
        if len(chunk) < 16:
            chunk = chunk.ljust(16, "1")
        entry = table[int(chunk, 2)]
        if entry is None:
            raise JpegDecodeError("invalid Huffman code", self.offset())
        sym, length = entry
        self.pos += length
        if self.pos > len(self.bits):
            raise JpegDecodeError("entropy-coded data ended inside a Huffman code", self.offset())
        return sym

    def receive_extend(self, size):
        if not size:
            return 0
        end = self.pos + size
        if end > len(self.bits):
            raise JpegDecodeError("entropy-coded data ended inside a coefficient", self.offset())
        v = int(self.bits[self.pos:end], 2)
        self.pos = end
        if v < 1 << (size - 1):
            v -= (1 << size) - 1
        return v


def encode_value_bits(value, size):
    """Additional bits for a coefficient of the given category (one's complement for negatives)."""
    return value if value >= 0 else value + (1 << size) - 1


