"""Baseline sequential JPEG codec with caller-supplied quantization tables.

Decodes to pixels or to the quantized DCT coefficients exactly as stored
(the forensic path), and encodes conformant JFIF streams with the standard
Huffman tables. Pixel decode is literally coefficient decode followed by
dequantize + IDCT + level shift, so the two paths can never disagree.

Scope: SOF0, 8-bit, 1 or 3 components, Huffman coding. Progressive,
arithmetic, and 12-bit streams are rejected with UnsupportedCoding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from jpegqt import dct, huffman, parse
from jpegqt.errors import (
    CorruptStream,
    ImageTooLarge,
    TruncatedSegment,
    UnsupportedCoding,
)
from jpegqt.image import GRAYSCALE, RGB, PixelImage
from jpegqt.qtables import (
    CHROMINANCE,
    LUMINANCE,
    QuantTable,
    natural_to_zigzag,
    zigzag_order,
)

_ZIGZAG = zigzag_order()           # zigzag position -> natural index
_ZZ_GATHER = np.array(_ZIGZAG)     # blocks[..., _ZZ_GATHER] reorders natural -> zigzag
_NAT_GATHER = np.array([_ZIGZAG.index(i) for i in range(64)])  # zigzag -> natural


@dataclass(frozen=True)
class EncodeParams:
    """Encoder knobs: the two tables, chroma subsampling, and restart interval (MCUs)."""

    luminance: QuantTable
    chrominance: QuantTable | None = None
    subsampling: str = "420"
    restart_interval: int = 0

    def __post_init__(self):
        if self.subsampling not in ("444", "420"):
            raise ValueError(f"subsampling must be '444' or '420', got {self.subsampling!r}")
        if self.restart_interval < 0 or self.restart_interval > 65535:
            raise ValueError("restart interval outside [0, 65535]")


@dataclass
class ComponentPlane:
    ident: int
    h: int
    v: int
    table: QuantTable
    blocks: np.ndarray  # (blocks_y, blocks_x, 64) int32, natural order


@dataclass
class CoeffImage:
    """Quantized DCT coefficients per component, plus the tables that bind them."""

    width: int
    height: int
    components: list = field(default_factory=list)

    @property
    def luminance(self) -> ComponentPlane:
        return self.components[0]


# --- color ---

def rgb_to_ycbcr(rgb: np.ndarray) -> np.ndarray:
    """Full-range BT.601 RGB -> YCbCr on 8-bit samples, rounding half away from zero."""
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 + (b - y) / 1.772
    cr = 128.0 + (r - y) / 1.402
    out = np.stack([y, cb, cr], axis=-1)
    return np.clip(dct.round_half_away(out), 0, 255).astype(np.uint8)


def ycbcr_to_rgb(ycc: np.ndarray) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr`, clamping into [0, 255]."""
    ycc = np.asarray(ycc, dtype=np.float64)
    y = ycc[..., 0]
    cb = ycc[..., 1] - 128.0
    cr = ycc[..., 2] - 128.0
    r = y + 1.402 * cr
    b = y + 1.772 * cb
    g = (y - 0.299 * r - 0.114 * b) / 0.587
    out = np.stack([r, g, b], axis=-1)
    return np.clip(dct.round_half_away(out), 0, 255).astype(np.uint8)


def luminance_plane(img: PixelImage) -> np.ndarray:
    """BT.601 luminance of an image as a uint8 plane."""
    if img.color_model == GRAYSCALE:
        return img.pixels
    return rgb_to_ycbcr(img.pixels)[..., 0]


def _box_downsample2(plane: np.ndarray) -> np.ndarray:
    """2x2 box-filter downsample with edge padding to even dimensions."""
    h, w = plane.shape
    padded = np.pad(plane, ((0, h % 2), (0, w % 2)), mode="edge").astype(np.int32)
    s = padded[0::2, 0::2] + padded[1::2, 0::2] + padded[0::2, 1::2] + padded[1::2, 1::2]
    return ((s + 2) // 4).astype(np.uint8)


# --- plane <-> block layout ---

def _plane_to_blocks(plane: np.ndarray, blocks_y: int, blocks_x: int) -> np.ndarray:
    """Edge-pad a sample plane to the block grid and cut it into 8x8 blocks."""
    h, w = plane.shape
    padded = np.pad(plane, ((0, blocks_y * 8 - h), (0, blocks_x * 8 - w)), mode="edge")
    return padded.reshape(blocks_y, 8, blocks_x, 8).transpose(0, 2, 1, 3)


def _blocks_to_plane(blocks: np.ndarray) -> np.ndarray:
    by, bx = blocks.shape[:2]
    return blocks.transpose(0, 2, 1, 3).reshape(by * 8, bx * 8)


# --- encoding ---

def _require_chroma(params: EncodeParams) -> QuantTable:
    if params.chrominance is None:
        raise ValueError("color encoding requires a chrominance table")
    return params.chrominance


def encode(img: PixelImage, params: EncodeParams) -> bytes:
    """Encode a PixelImage as a baseline JFIF stream. Deterministic byte-for-byte."""
    if img.width > 65535 or img.height > 65535:
        raise ImageTooLarge(f"{img.width}x{img.height} exceeds the 65535 pixel limit")

    if img.color_model == GRAYSCALE:
        comps = [_build_component(1, 1, 1, 1, 1, params.luminance, img.pixels,
                                  img.width, img.height)]
    else:
        chroma = _require_chroma(params)
        ycc = rgb_to_ycbcr(img.pixels)
        if params.subsampling == "444":
            factors = [(1, 1), (1, 1), (1, 1)]
            planes = [ycc[..., 0], ycc[..., 1], ycc[..., 2]]
        else:
            factors = [(2, 2), (1, 1), (1, 1)]
            planes = [ycc[..., 0], _box_downsample2(ycc[..., 1]), _box_downsample2(ycc[..., 2])]
        hmax = max(f[0] for f in factors)
        vmax = max(f[1] for f in factors)
        tables = [params.luminance, chroma, chroma]
        comps = [
            _build_component(i + 1, f[0], f[1], hmax, vmax, t, p, img.width, img.height)
            for i, (f, t, p) in enumerate(zip(factors, tables, planes))
        ]

    ci = CoeffImage(img.width, img.height, comps)
    return encode_coefficients(ci, restart_interval=params.restart_interval)


def _build_component(ident, h, v, hmax, vmax, table, plane, width, height) -> ComponentPlane:
    mcus_x = math.ceil(width / (8 * hmax))
    mcus_y = math.ceil(height / (8 * vmax))
    blocks = _plane_to_blocks(plane, mcus_y * v, mcus_x * h)
    coeffs = dct.fdct_blocks(blocks.astype(np.float64) - 128.0)
    levels = dct.quantize_blocks(coeffs, table.values)
    return ComponentPlane(ident, h, v, table, levels.reshape(levels.shape[0], levels.shape[1], 64))


def encode_coefficients(ci: CoeffImage, restart_interval: int = 0) -> bytes:
    """Entropy-encode stored coefficients without requantization.

    Together with :func:`decode_to_coefficients` this is a lossless
    round-trip: the re-encoded file decodes to the same pixels as the
    source.
    """
    if ci.width > 65535 or ci.height > 65535:
        raise ImageTooLarge(f"{ci.width}x{ci.height} exceeds the 65535 pixel limit")
    if len(ci.components) not in (1, 3):
        raise UnsupportedCoding(f"{len(ci.components)} components")

    comps = ci.components
    if len(comps) == 1:
        c = comps[0]
        # Sampling factors are meaningless for a single component.
        comps = [ComponentPlane(c.ident, 1, 1, c.table, c.blocks)]

    # Assign DQT slots: unique tables in component order.
    tables: list[QuantTable] = []
    table_ids = []
    for c in comps:
        if c.table in tables:
            table_ids.append(tables.index(c.table))
        else:
            tables.append(c.table)
            table_ids.append(len(tables) - 1)

    out = bytearray(b"\xff\xd8")
    out += _app0_jfif()
    out += _dqt_segment(tables)
    out += _sof0_segment(ci.width, ci.height, comps, table_ids)
    out += _dht_segment(len(comps) > 1)
    if restart_interval:
        out += b"\xff\xdd" + (4).to_bytes(2, "big") + restart_interval.to_bytes(2, "big")
    out += _sos_segment(comps)
    out += _entropy_data(comps, restart_interval)
    out += b"\xff\xd9"
    return bytes(out)


def _app0_jfif() -> bytes:
    payload = b"JFIF\x00" + bytes([1, 1, 0]) + (1).to_bytes(2, "big") * 2 + bytes([0, 0])
    return b"\xff\xe0" + (len(payload) + 2).to_bytes(2, "big") + payload


def _dqt_segment(tables) -> bytes:
    payload = bytearray()
    for tid, table in enumerate(tables):
        pq = 0 if table.precision == 8 else 1
        payload.append((pq << 4) | tid)
        for v in natural_to_zigzag(table.values):
            payload += v.to_bytes(2 if pq else 1, "big")
    return b"\xff\xdb" + (len(payload) + 2).to_bytes(2, "big") + bytes(payload)


def _sof0_segment(width, height, comps, table_ids) -> bytes:
    payload = bytearray([8])
    payload += height.to_bytes(2, "big") + width.to_bytes(2, "big")
    payload.append(len(comps))
    for c, tid in zip(comps, table_ids):
        payload += bytes([c.ident, (c.h << 4) | c.v, tid])
    return b"\xff\xc0" + (len(payload) + 2).to_bytes(2, "big") + bytes(payload)


def _dht_segment(color: bool) -> bytes:
    specs = [(0x00, huffman.STD_DC_LUMINANCE), (0x10, huffman.STD_AC_LUMINANCE)]
    if color:
        specs += [(0x01, huffman.STD_DC_CHROMINANCE), (0x11, huffman.STD_AC_CHROMINANCE)]
    payload = bytearray()
    for tc_th, (bits, values) in specs:
        payload.append(tc_th)
        payload += bytes(bits)
        payload += bytes(values)
    return b"\xff\xc4" + (len(payload) + 2).to_bytes(2, "big") + bytes(payload)


def _sos_segment(comps) -> bytes:
    payload = bytearray([len(comps)])
    for i, c in enumerate(comps):
        tbl = 0 if i == 0 else 1
        payload += bytes([c.ident, (tbl << 4) | tbl])
    payload += bytes([0, 63, 0])
    return b"\xff\xda" + (len(payload) + 2).to_bytes(2, "big") + bytes(payload)


def _entropy_data(comps, restart_interval: int) -> bytes:
    ncomp = len(comps)
    enc_dc = [huffman.encode_table(*(huffman.STD_DC_LUMINANCE if i == 0 else huffman.STD_DC_CHROMINANCE))
              for i in range(ncomp)]
    enc_ac = [huffman.encode_table(*(huffman.STD_AC_LUMINANCE if i == 0 else huffman.STD_AC_CHROMINANCE))
              for i in range(ncomp)]

    # Reorder every block to zigzag once, as plain Python ints.
    zz_blocks = [np.ascontiguousarray(c.blocks[:, :, _ZZ_GATHER]) for c in comps]
    mcus_y = zz_blocks[0].shape[0] // comps[0].v
    mcus_x = zz_blocks[0].shape[1] // comps[0].h

    bw = huffman.BitWriter()
    preds = [0] * ncomp
    mcu_index = 0
    for my in range(mcus_y):
        for mx in range(mcus_x):
            if restart_interval and mcu_index and mcu_index % restart_interval == 0:
                bw.flush()
                rst = 0xD0 + ((mcu_index // restart_interval - 1) % 8)
                bw.data += bytes([0xFF, rst])
                preds = [0] * ncomp
            for idx, c in enumerate(comps):
                for by in range(c.v):
                    for bx in range(c.h):
                        zz = zz_blocks[idx][my * c.v + by, mx * c.h + bx].tolist()
                        preds[idx] = _encode_block(zz, preds[idx], enc_dc[idx], enc_ac[idx], bw)
            mcu_index += 1
    bw.flush()
    return bytes(bw.data)


def _encode_block(zz, pred, dc_table, ac_table, bw) -> int:
    diff = zz[0] - pred
    cat = huffman.magnitude_category(diff)
    try:
        code, length = dc_table[cat]
    except KeyError:
        raise ValueError(f"DC difference {diff} outside the baseline range") from None
    bw.write(code, length)
    if cat:
        bw.write(huffman.magnitude_bits(diff, cat), cat)

    last = 63
    while last >= 1 and zz[last] == 0:
        last -= 1
    run = 0
    for k in range(1, last + 1):
        v = zz[k]
        if v == 0:
            run += 1
            continue
        while run >= 16:
            code, length = ac_table[0xF0]
            bw.write(code, length)
            run -= 16
        cat = huffman.magnitude_category(v)
        sym = (run << 4) | cat
        try:
            code, length = ac_table[sym]
        except KeyError:
            raise ValueError(f"AC coefficient {v} outside the baseline range") from None
        bw.write(code, length)
        bw.write(huffman.magnitude_bits(v, cat), cat)
        run = 0
    if last < 63:
        code, length = ac_table[0x00]
        bw.write(code, length)
    return zz[0]


# --- decoding ---

def decode_to_coefficients(data: bytes) -> CoeffImage:
    """Entropy-decode the quantized coefficients exactly as stored; no IDCT."""
    smap = parse.scan_segments(data)
    qtables = {}
    dc_specs = {}
    ac_specs = {}
    restart_interval = 0
    frame = None

    for seg in smap.segments:
        m = seg.marker
        if m in parse.SOF_MARKERS:
            if m != 0xC0:
                raise UnsupportedCoding(f"SOF marker 0xFF{m:02X} is not baseline sequential")
            frame = parse._parse_sof(seg, data)
            if frame.bit_depth != 8:
                raise UnsupportedCoding(f"{frame.bit_depth}-bit samples")
            if frame.n_components not in (1, 3):
                raise UnsupportedCoding(f"{frame.n_components} components")
        elif m == parse.DQT:
            payload = data[seg.payload_start:seg.payload_start + seg.length]
            for rec in parse.parse_dqt_payload(payload, seg.offset):
                qtables[rec.table_id] = rec.table
        elif m == parse.DHT:
            _parse_dht(data[seg.payload_start:seg.payload_start + seg.length], dc_specs, ac_specs)
        elif m == parse.DRI:
            payload = data[seg.payload_start:seg.payload_start + seg.length]
            if len(payload) < 2:
                raise TruncatedSegment("DRI payload too short")
            restart_interval = (payload[0] << 8) | payload[1]
        elif m == parse.DAC:
            raise UnsupportedCoding("arithmetic coding")
        elif m == parse.SOS:
            return _decode_scan(data, seg, frame, qtables, dc_specs, ac_specs, restart_interval)
    raise CorruptStream("no SOS segment")


def _parse_dht(payload: bytes, dc_specs: dict, ac_specs: dict) -> None:
    pos = 0
    while pos < len(payload):
        tc_th = payload[pos]
        tc, th = tc_th >> 4, tc_th & 0x0F
        pos += 1
        if tc > 1 or th > 3:
            raise CorruptStream(f"bad DHT class/id byte 0x{tc_th:02X}")
        if pos + 16 > len(payload):
            raise TruncatedSegment("DHT payload shorter than its counts")
        bits = tuple(payload[pos:pos + 16])
        pos += 16
        n = sum(bits)
        if pos + n > len(payload):
            raise TruncatedSegment("DHT payload shorter than its values")
        values = tuple(payload[pos:pos + n])
        pos += n
        (dc_specs if tc == 0 else ac_specs)[th] = (bits, values)


def _decode_scan(data, sos_seg, frame, qtables, dc_specs, ac_specs, restart_interval) -> CoeffImage:
    if frame is None:
        raise CorruptStream("SOS before SOF")
    payload = data[sos_seg.payload_start:sos_seg.payload_start + sos_seg.length]
    if len(payload) < 1:
        raise TruncatedSegment("empty SOS payload")
    ns = payload[0]
    if len(payload) != 1 + 2 * ns + 3:
        raise CorruptStream("SOS payload length mismatch")
    if ns != frame.n_components:
        raise UnsupportedCoding("multi-scan baseline stream")
    ss, se, ahal = payload[1 + 2 * ns:1 + 2 * ns + 3]
    if (ss, se, ahal) != (0, 63, 0):
        raise CorruptStream("non-baseline spectral selection in SOS")

    by_id = {c[0]: c for c in frame.components}
    if len(by_id) != frame.n_components:
        raise CorruptStream("duplicate component ids in frame header")

    scan = []
    for i in range(ns):
        cs = payload[1 + 2 * i]
        td_ta = payload[2 + 2 * i]
        td, ta = td_ta >> 4, td_ta & 0x0F
        if cs not in by_id:
            raise CorruptStream(f"scan references unknown component {cs}")
        cid, h, v, tq = by_id[cs]
        if tq not in qtables:
            raise CorruptStream(f"missing quantization table {tq}")
        if td not in dc_specs or ta not in ac_specs:
            raise CorruptStream("missing Huffman table")
        if h not in (1, 2, 4) or v not in (1, 2, 4):
            raise UnsupportedCoding(f"sampling factors {h}x{v}")
        scan.append((cid, h, v, qtables[tq],
                     huffman.decode_table(*dc_specs[td]),
                     huffman.decode_table(*ac_specs[ta])))

    hmax = max(s[1] for s in scan)
    vmax = max(s[2] for s in scan)
    for _, h, v, *_ in scan:
        if hmax % h or vmax % v:
            raise UnsupportedCoding(f"non-integer sampling ratio {h}x{v} vs {hmax}x{vmax}")

    if ns == 1:
        # Non-interleaved: one block per MCU over the component's own grid.
        mcus_x = math.ceil(frame.width / 8)
        mcus_y = math.ceil(frame.height / 8)
        geometry = [(1, 1)]
    else:
        mcus_x = math.ceil(frame.width / (8 * hmax))
        mcus_y = math.ceil(frame.height / (8 * vmax))
        geometry = [(h, v) for _, h, v, *_ in scan]

    grids = [np.zeros((mcus_y * v, mcus_x * h, 64), dtype=np.int32) for h, v in geometry]
    reader = huffman.BitReader(data, sos_seg.payload_start + sos_seg.length)
    preds = [0] * ns
    mcu_index = 0
    for my in range(mcus_y):
        for mx in range(mcus_x):
            if restart_interval and mcu_index and mcu_index % restart_interval == 0:
                reader.align_to_byte()
                expected = 0xD0 + ((mcu_index // restart_interval - 1) % 8)
                if reader.next_marker() != expected:
                    raise CorruptStream("restart marker missing or out of sequence")
                reader.skip_marker()
                preds = [0] * ns
            for idx, (h, v) in enumerate(geometry):
                dc_tab = scan[idx][4]
                ac_tab = scan[idx][5]
                for by in range(v):
                    for bx in range(h):
                        zz, preds[idx] = _decode_block(reader, dc_tab, ac_tab, preds[idx])
                        grids[idx][my * v + by, mx * h + bx] = zz
            mcu_index += 1

    comps = []
    for idx, (cid, h, v, table, _, _) in enumerate(scan):
        natural = np.ascontiguousarray(grids[idx][:, :, _NAT_GATHER])
        comps.append(ComponentPlane(cid, h, v, table, natural))
    return CoeffImage(frame.width, frame.height, comps)


def _decode_block(reader, dc_tab, ac_tab, pred):
    cat = reader.read_symbol(dc_tab)
    if cat > 11:
        raise CorruptStream(f"DC category {cat}")
    diff = huffman.extend_magnitude(reader.read_bits(cat), cat) if cat else 0
    dc = pred + diff
    zz = [0] * 64
    zz[0] = dc
    k = 1
    while k < 64:
        sym = reader.read_symbol(ac_tab)
        run, size = sym >> 4, sym & 0x0F
        if size == 0:
            if run == 15:
                k += 16
                continue
            break
        k += run
        if k > 63:
            raise CorruptStream("AC run extends past the block")
        zz[k] = huffman.extend_magnitude(reader.read_bits(size), size)
        k += 1
    return zz, dc


def coefficients_to_pixels(ci: CoeffImage) -> PixelImage:
    """Dequantize + IDCT + level shift; chroma upsampled by replication."""
    hmax = max(c.h for c in ci.components)
    vmax = max(c.v for c in ci.components)
    planes = []
    for c in ci.components:
        by, bx = c.blocks.shape[:2]
        deq = dct.dequantize_blocks(c.blocks.reshape(by, bx, 8, 8), c.table.values)
        pix = dct.idct_blocks(deq.astype(np.float64)) + 128.0
        plane = np.clip(dct.round_half_away(pix), 0, 255).astype(np.uint8)
        plane = _blocks_to_plane(plane)
        cw = math.ceil(ci.width * c.h / hmax)
        ch = math.ceil(ci.height * c.v / vmax)
        planes.append(plane[:ch, :cw])

    if len(planes) == 1:
        return PixelImage(planes[0][:ci.height, :ci.width], GRAYSCALE)

    full = []
    for c, plane in zip(ci.components, planes):
        up = np.repeat(np.repeat(plane, vmax // c.v, axis=0), hmax // c.h, axis=1)
        full.append(up[:ci.height, :ci.width])
    rgb = ycbcr_to_rgb(np.stack(full, axis=-1))
    return PixelImage(rgb, RGB)


def decode(data: bytes) -> PixelImage:
    """Decode a baseline JPEG to pixels. Deterministic; grayscale or RGB output."""
    return coefficients_to_pixels(decode_to_coefficients(data))
