"""Baseline JPEG parsing to quantized coefficients and re-encoding."""

import struct

import numpy as np

from ..errors import CodingRangeError, FormatError, JpegDecodeError, UnsupportedFormatError
from .huffman import BitReader, BitWriter, canonical_codes, category, encode_value_bits, lookup_table, optimal_table
from .image import CoefficientImage, Component, block_grid

SOI, EOI, SOS, DQT, DHT, DRI, DNL, COM = 0xD8, 0xD9, 0xDA, 0xDB, 0xC4, 0xDD, 0xDC, 0xFE
SOF0, SOF1 = 0xC0, 0xC1
UNSUPPORTED_SOF = {
    0xC2: "progressive DCT", 0xC3: "lossless", 0xC5: "hierarchical", 0xC6: "hierarchical",
    0xC7: "hierarchical", 0xC9: "arithmetic coding", 0xCA: "arithmetic coding",
    0xCB: "arithmetic coding", 0xCD: "arithmetic coding", 0xCE: "arithmetic coding",
    0xCF: "arithmetic coding",
}
DAC = 0xCC

JFIF_APP0 = (0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")


class _Frame:
    def __init__(self, width, height, comps):
        self.width = width
        self.height = height
        # comps: list of (id, h, v, tq)
        self.comps = comps
        grids = block_grid(width, height, [(h, v) for _, h, v, _ in comps])
        self.grids = grids
        self.blocks = [np.zeros((bw * bh, 64), dtype=np.int32) for bw, bh in grids]
        self.h_max = max(h for _, h, _, _ in comps)
        self.v_max = max(v for _, _, v, _ in comps)


def _read_u16(data, pos):
    if pos + 2 > len(data):
        raise FormatError("unexpected end of data", pos)
    return struct.unpack_from(">H", data, pos)[0]


def _segment(data, pos):
    """Return (payload, next_pos) for the length-prefixed segment at ``pos``."""
    length = _read_u16(data, pos)
    if length < 2 or pos + length > len(data):
        raise FormatError("truncated marker segment", pos)
    return data[pos + 2:pos + length], pos + length


def _parse_dqt(payload, offset, tables):
    pos = 0
    while pos < len(payload):
        pq, tq = payload[pos] >> 4, payload[pos] & 15
        if pq > 1 or tq > 3:
            raise FormatError(f"invalid DQT table spec {payload[pos]:#04x}", offset + pos)
        n = 64 * (pq + 1)
        raw = payload[pos + 1:pos + 1 + n]
        if len(raw) < n:
            raise FormatError("truncated DQT segment", offset + pos)
        if pq:
            values = np.frombuffer(raw, dtype=">u2").astype(np.int32)
        else:
            values = np.frombuffer(raw, dtype=np.uint8).astype(np.int32)
        if np.any(values == 0):
            raise FormatError("quantization table contains a zero entry", offset + pos)
        tables[tq] = values
        pos += 1 + n


def _parse_dht(payload, offset, dc_tables, ac_tables):
    pos = 0
    while pos < len(payload):
        tc, th = payload[pos] >> 4, payload[pos] & 15
        if tc > 1 or th > 3:
            raise FormatError(f"invalid DHT table spec {payload[pos]:#04x}", offset + pos)
        bits = list(payload[pos + 1:pos + 17])
        if len(bits) < 16:
            raise FormatError("truncated DHT segment", offset + pos)
        total = sum(bits)
        huffval = list(payload[pos + 17:pos + 17 + total])
        if len(huffval) < total:
            raise FormatError("truncated DHT segment", offset + pos)
        # Kraft check: an over-full table cannot be decoded
        if sum(n / (1 << (i + 1)) for i, n in enumerate(bits)) > 1:
            raise FormatError("over-subscribed Huffman table", offset + pos)
        (dc_tables if tc == 0 else ac_tables)[th] = lookup_table(bits, huffval)
        pos += 17 + total


def _parse_sof(marker, payload, offset):
    if marker in UNSUPPORTED_SOF:
        raise UnsupportedFormatError(f"{UNSUPPORTED_SOF[marker]} JPEG is not supported", offset - 4)
    if len(payload) < 6:
        raise FormatError("truncated SOF segment", offset)
    precision, height, width, ncomp = struct.unpack_from(">BHHB", payload, 0)
    if precision != 8:
        raise UnsupportedFormatError(f"{precision}-bit sample precision is not supported", offset)
    if height == 0:
        raise UnsupportedFormatError("DNL-defined image height is not supported", offset + 1)
    if width == 0:
        raise FormatError("zero image width", offset + 3)
    if ncomp not in (1, 3):
        raise UnsupportedFormatError(f"{ncomp}-component images are not supported", offset + 5)
    if len(payload) < 6 + 3 * ncomp:
        raise FormatError("truncated SOF segment", offset)
    comps = []
    for i in range(ncomp):
        cid, hv, tq = payload[6 + 3 * i:9 + 3 * i]
        h, v = hv >> 4, hv & 15
        if not (1 <= h <= 4 and 1 <= v <= 4) or tq > 3:
            raise FormatError(f"invalid component spec for component {cid}", offset + 6 + 3 * i)
        comps.append((cid, h, v, tq))
    if len({c[0] for c in comps}) != ncomp:
        raise FormatError("duplicate component ids", offset + 6)
    return _Frame(width, height, comps)


def _scan_segments(data, pos):
    """Split entropy-coded data starting at ``pos`` into restart intervals.

    Returns (segments, end_pos) where each segment is (unstuffed bytes, offsets).
    """
    segments = []
    buf = bytearray()
    offsets = []
    n = len(data)
    while True:
        ff = data.find(b"\xff", pos)
        if ff < 0:
            raise FormatError("missing EOI", n)
        buf += data[pos:ff]
        offsets.extend(range(pos, ff))
        if ff + 1 >= n:
            raise FormatError("missing EOI", n)
        nxt = data[ff + 1]
        if nxt == 0x00:
            buf.append(0xFF)
            offsets.append(ff)
            pos = ff + 2
        elif nxt == 0xFF:
            # fill byte before a marker
            pos = ff + 1
        elif 0xD0 <= nxt <= 0xD7:
            segments.append((bytes(buf), offsets))
            buf = bytearray()
            offsets = []
            pos = ff + 2
        else:
            segments.append((bytes(buf), offsets))
            return segments, ff


def _decode_block(reader, dc_table, ac_table, out, pred):
    t = reader.decode(dc_table)
    if t > 11:
        raise JpegDecodeError(f"invalid DC category {t}", reader.offset())
    dc = pred + reader.receive_extend(t)
    out[0] = dc
    k = 1
    while k < 64:
        rs = reader.decode(ac_table)
        r, s = rs >> 4, rs & 15
        if s == 0:
            if r == 15:
                k += 16
                continue
            break
        k += r
        if k > 63:
            raise JpegDecodeError("AC run exceeds block length", reader.offset())
        out[k] = reader.receive_extend(s)
        k += 1
    if k > 64:
        raise JpegDecodeError("AC run exceeds block length", reader.offset())
    return dc


def _decode_scan(data, pos, frame, scan_comps, dc_tables, ac_tables, restart_interval):
    """Decode one scan; returns the position of the marker that ends it."""
    for _, td, ta in scan_comps:
        if dc_tables[td] is None or ac_tables[ta] is None:
            raise FormatError("scan references an undefined Huffman table", pos)
    segments, end = _scan_segments(data, pos)
    if len(scan_comps) == 1:
        ci = scan_comps[0][0]
        _, h, v, _ = frame.comps[ci]
        if len(frame.comps) == 1:
            bw, bh = frame.grids[0]
        else:
            bw = -(-(-(-frame.width * h // frame.h_max)) // 8)
            bh = -(-(-(-frame.height * v // frame.v_max)) // 8)
        grid_w = frame.grids[ci][0]
        units = [[(ci, by * grid_w + bx)] for by in range(bh) for bx in range(bw)]
    else:
        mcus_x = -(-frame.width // (8 * frame.h_max))
        mcus_y = -(-frame.height // (8 * frame.v_max))
        units = []
        for my in range(mcus_y):
            for mx in range(mcus_x):
                unit = []
                for ci, _, _ in scan_comps:
                    _, h, v, _ = frame.comps[ci]
                    grid_w = frame.grids[ci][0]
                    for y in range(v):
                        for x in range(h):
                            unit.append((ci, (my * v + y) * grid_w + mx * h + x))
                units.append(unit)

    interval = restart_interval or len(units)
    expected = -(-len(units) // interval) if units else 0
    if len(segments) < expected:
        raise JpegDecodeError(
            f"scan has {len(segments)} restart intervals, expected {expected}", end
        )
    tables = {ci: (dc_tables[td], ac_tables[ta]) for ci, td, ta in scan_comps}
    for seg_index in range(expected):
        seg_data, offsets = segments[seg_index]
        reader = BitReader(seg_data, offsets)
        preds = dict.fromkeys(tables, 0)
        for unit in units[seg_index * interval:(seg_index + 1) * interval]:
            for ci, bi in unit:
                dc_table, ac_table = tables[ci]
                block = frame.blocks[ci][bi]
                block[:] = 0
                preds[ci] = _decode_block(reader, dc_table, ac_table, block, preds[ci])
    return end


def parse_jpeg(data):
    """Entropy-decode a baseline JPEG into a CoefficientImage."""
    data = bytes(data)
    if data[:2] != b"\xff\xd8":
        raise FormatError("missing SOI", 0)
    pos = 2
    quant = {}
    dc_tables = [None] * 4
    ac_tables = [None] * 4
    app_segments = []
    frame = None
    restart_interval = 0
    scanned = False
    n = len(data)
    while True:
        # skip fill bytes
        while pos < n and data[pos] == 0xFF and pos + 1 < n and data[pos + 1] == 0xFF:
            pos += 1
        if pos + 2 > n:
            raise FormatError("missing EOI", n)
        if data[pos] != 0xFF:
            raise FormatError(f"expected marker, found byte {data[pos]:#04x}", pos)
        marker = data[pos + 1]
        pos += 2
        if marker == EOI:
            break
        if marker == SOI:
            raise FormatError("unexpected SOI", pos - 2)
        if 0xD0 <= marker <= 0xD7:
            raise FormatError("restart marker outside a scan", pos - 2)
        payload, nxt = _segment(data, pos)
        body = pos + 2
        if 0xE0 <= marker <= 0xEF or marker == COM:
            app_segments.append((marker, payload))
        elif marker == DQT:
            _parse_dqt(payload, body, quant)
        elif marker == DHT:
            _parse_dht(payload, body, dc_tables, ac_tables)
        elif marker == DAC:
            raise UnsupportedFormatError("arithmetic coding is not supported", pos - 2)
        elif marker == DRI:
            if len(payload) < 2:
                raise FormatError("truncated DRI segment", body)
            restart_interval = struct.unpack_from(">H", payload)[0]
        elif marker in (SOF0, SOF1) or marker in UNSUPPORTED_SOF:
            if frame is not None:
                raise FormatError("multiple frames", pos - 2)
            frame = _parse_sof(marker, payload, body)
        elif marker == SOS:
            if frame is None:
                raise FormatError("SOS before SOF", pos - 2)
            ns = payload[0] if payload else 0
            if not 1 <= ns <= 4 or len(payload) < 4 + 2 * ns:
                raise FormatError("malformed SOS segment", body)
            ids = [c[0] for c in frame.comps]
            scan_comps = []
            for i in range(ns):
                cid, tables = payload[1 + 2 * i], payload[2 + 2 * i]
                if cid not in ids:
                    raise FormatError(f"scan references unknown component {cid}", body + 1 + 2 * i)
                scan_comps.append((ids.index(cid), tables >> 4, tables & 15))
            ss, se, ahal = payload[1 + 2 * ns:4 + 2 * ns]
            if (ss, se, ahal) != (0, 63, 0):
                raise UnsupportedFormatError("spectral selection / successive approximation", body)
            for ci, td, ta in scan_comps:
                if td > 3 or ta > 3:
                    raise FormatError("invalid Huffman table selector", body)
            nxt = _decode_scan(data, nxt, frame, scan_comps, dc_tables, ac_tables, restart_interval)
            scanned = True
        elif marker == DNL:
            raise UnsupportedFormatError("DNL marker is not supported", pos - 2)
        # other markers are skipped
        pos = nxt

    if frame is None or not scanned:
        raise FormatError("no frame or scan data before EOI", pos)
    components = []
    for (cid, h, v, tq), (bw, bh), blocks in zip(frame.comps, frame.grids, frame.blocks):
        if tq not in quant:
            raise FormatError(f"component {cid} references undefined quantization table {tq}")
        components.append(Component(cid, h, v, tq, bw, bh, blocks))
    return CoefficientImage(frame.width, frame.height, components,
                            {k: v for k, v in quant.items() if k in {c.tq for c in components}},
                            app_segments)


def _marker_segment(marker, payload):
    return bytes([0xFF, marker]) + struct.pack(">H", len(payload) + 2) + payload


def _check_range(image):
    block_index = 0
    for comp in image.components:
        ac = np.abs(comp.blocks[:, 1:])
        bad = np.flatnonzero(ac.max(axis=1, initial=0) > 1023) if len(ac) else []
        if len(bad):
            raise CodingRangeError(
                f"AC coefficient out of codable range in component {comp.id}, block {bad[0]}",
                block_index + int(bad[0]),
            )
        dc = comp.blocks[:, 0].astype(np.int64)
        diffs = np.diff(dc, prepend=0)
        bad = np.flatnonzero(np.abs(diffs) > 2047)
        if len(bad):
            raise CodingRangeError(
                f"DC difference out of codable range in component {comp.id}, block {bad[0]}",
                block_index + int(bad[0]),
            )
        block_index += len(comp.blocks)


def _symbols(image):
    """First pass: entropy symbols in scan order as (table, kind, symbol, extra, size)."""
    comps = image.components
    if len(comps) == 1:
        comp = comps[0]
        order = [(0, bi) for bi in range(len(comp.blocks))]
    else:
        h_max, v_max = image.h_max, image.v_max
        mcus_x = -(-image.width // (8 * h_max))
        mcus_y = -(-image.height // (8 * v_max))
        order = []
        for my in range(mcus_y):
            for mx in range(mcus_x):
                for ci, comp in enumerate(comps):
                    for y in range(comp.v):
                        for x in range(comp.h):
                            order.append((ci, (my * comp.v + y) * comp.blocks_w + mx * comp.h + x))

    preds = [0] * len(comps)
    out = []
    lists = [c.blocks.tolist() for c in comps]
    for ci, bi in order:
        table = 0 if ci == 0 else 1
        block = lists[ci][bi]
        diff = block[0] - preds[ci]
        preds[ci] = block[0]
        size = category(diff)
        out.append((table, 0, size, encode_value_bits(diff, size), size))
        run = 0
        last = 63
        while last > 0 and block[last] == 0:
            last -= 1
        for k in range(1, last + 1):
            v = block[k]
            if v == 0:
                run += 1
                continue
            while run > 15:
                out.append((table, 1, 0xF0, 0, 0))
                run -= 16
            size = category(v)
            out.append((table, 1, (run << 4) | size, encode_value_bits(v, size), size))
            run = 0
        if last < 63:
            out.append((table, 1, 0x00, 0, 0))
    return out


def serialize_jpeg(image):
    """Emit a baseline JPEG with freshly optimized Huffman tables."""
    _check_range(image)
    symbols = _symbols(image)
    n_tables = 1 if len(image.components) == 1 else 2
    freqs = [[{}, {}] for _ in range(n_tables)]
    for table, kind, sym, _, _ in symbols:
        f = freqs[table][kind]
        f[sym] = f.get(sym, 0) + 1

    out = bytearray(b"\xff\xd8")
    segments = image.app_segments or [JFIF_APP0]
    for marker, payload in segments:
        out += _marker_segment(marker, payload)

    used = sorted({c.tq for c in image.components})
    extended = False
    for tq in used:
        values = np.asarray(image.quant_tables[tq])
        if values.max() > 255:
            extended = True
            out += _marker_segment(DQT, bytes([0x10 | tq]) + values.astype(">u2").tobytes())
        else:
            out += _marker_segment(DQT, bytes([tq]) + values.astype(np.uint8).tobytes())

    sof = struct.pack(">BHHB", 8, image.height, image.width, len(image.components))
    for comp in image.components:
        sof += bytes([comp.id, (comp.h << 4) | comp.v, comp.tq])
    out += _marker_segment(SOF1 if extended else SOF0, sof)

    codes = []
    dht = bytearray()
    for t in range(n_tables):
        pair = []
        for kind in (0, 1):
            freq = freqs[t][kind] or {0: 1}
            bits, huffval = optimal_table(freq)
            dht += bytes([(kind << 4) | t]) + bytes(bits) + bytes(huffval)
            pair.append(canonical_codes(bits, huffval))
        codes.append(pair)
    out += _marker_segment(DHT, bytes(dht))

    sos = bytes([len(image.components)])
    for ci, comp in enumerate(image.components):
        t = 0 if ci == 0 else 1
        sos += bytes([comp.id, (t << 4) | t])
    sos += bytes([0, 63, 0])
    out += _marker_segment(SOS, sos)

    writer = BitWriter()
    for table, kind, sym, extra, size in symbols:
        code, length = codes[table][kind][sym]
        writer.write(code, length)
        writer.write(extra, size)
    out += writer.flush()
    out += b"\xff\xd9"
    return bytes(out)
