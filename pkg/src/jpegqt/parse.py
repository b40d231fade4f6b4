"""Marker-level JPEG scanning: quantization tables and frame metadata from
headers, without decoding the image.

Works on progressive and arithmetic-coded files too, since none of it needs
a decodable scan: entropy-coded data is skipped by searching for the next
marker while honoring byte stuffing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from jpegqt.errors import (
    InvalidPrecision,
    InvalidTableId,
    MissingSoi,
    NoFrameHeader,
    TruncatedSegment,
    UnsupportedFrameType,
)
from jpegqt.qtables import CHROMINANCE, LUMINANCE, UNSPECIFIED, QuantTable, zigzag_to_natural

SOI = 0xD8
EOI = 0xD9
SOS = 0xDA
DQT = 0xDB
DNL = 0xDC
DRI = 0xDD
DHT = 0xC4
DAC = 0xCC
COM = 0xFE
TEM = 0x01

SOF_MARKERS = (0xC0, 0xC1, 0xC2, 0xC3, 0xC5, 0xC6, 0xC7,
               0xC9, 0xCA, 0xCB, 0xCD, 0xCE, 0xCF)
_SOF_DCT_HUFFMAN = (0xC0, 0xC1, 0xC2)
_SOF_DCT_ARITHMETIC = (0xC9, 0xCA)
_STANDALONE = frozenset([SOI, EOI, TEM] + list(range(0xD0, 0xD8)))

JPEG_MAGIC = b"\xff\xd8"


@dataclass(frozen=True)
class Segment:
    marker: int
    offset: int        # offset of the 0xFF byte
    length: int        # payload bytes (declared length minus 2); 0 for bare markers

    @property
    def payload_start(self) -> int:
        return self.offset + 4


@dataclass
class SegmentMap:
    segments: list = field(default_factory=list)
    has_sof0: bool = False
    has_sof2: bool = False
    has_arithmetic: bool = False
    truncated: bool = False

    def first(self, marker: int):
        for seg in self.segments:
            if seg.marker == marker:
                return seg
        return None

    def all(self, marker: int):
        return [seg for seg in self.segments if seg.marker == marker]


@dataclass(frozen=True)
class DqtRecord:
    table: QuantTable
    table_id: int
    precision: int
    segment_offset: int


@dataclass(frozen=True)
class FrameInfo:
    width: int
    height: int
    bit_depth: int
    frame_marker: int
    components: tuple  # of (component id, h sampling, v sampling, quant table id)

    @property
    def progressive(self) -> bool:
        return self.frame_marker == 0xC2

    @property
    def n_components(self) -> int:
        return len(self.components)


def scan_segments(data: bytes) -> SegmentMap:
    """Enumerate all marker segments of a JPEG byte stream.

    Raises MissingSoi if the buffer does not start with SOI. A stream that
    ends mid-segment or mid-scan raises TruncatedSegment whose
    ``segment_map`` attribute carries the flagged partial result with every
    segment before the cut intact.
    """
    smap = SegmentMap()
    if len(data) < 2 or data[0] != 0xFF or data[1] != SOI:
        raise MissingSoi("buffer does not start with an SOI marker")
    smap.segments.append(Segment(SOI, 0, 0))
    pos = 2

    def _truncated():
        smap.truncated = True
        err = TruncatedSegment(f"stream cut near offset {pos}")
        err.segment_map = smap
        return err

    while pos < len(data):
        if data[pos] != 0xFF:
            raise _truncated()
        # Optional fill bytes before the marker code.
        start = pos
        while pos < len(data) and data[pos] == 0xFF:
            pos += 1
        if pos >= len(data):
            raise _truncated()
        marker = data[pos]
        if marker == 0x00:
            raise _truncated()
        pos += 1

        if marker in SOF_MARKERS:
            if marker == 0xC0:
                smap.has_sof0 = True
            elif marker == 0xC2:
                smap.has_sof2 = True
            if marker not in _SOF_DCT_HUFFMAN and marker != 0xC3:
                smap.has_arithmetic = True
        elif marker == DAC:
            smap.has_arithmetic = True

        if marker in _STANDALONE:
            smap.segments.append(Segment(marker, start, 0))
            if marker == EOI:
                return smap
            continue

        if pos + 2 > len(data):
            raise _truncated()
        declared = (data[pos] << 8) | data[pos + 1]
        if declared < 2:
            raise _truncated()
        payload_len = declared - 2
        if pos + 2 + payload_len > len(data):
            raise _truncated()
        smap.segments.append(Segment(marker, start, payload_len))
        pos += 2 + payload_len

        if marker == SOS:
            # Skip entropy-coded data: look for a marker that is not a
            # stuffed zero and not a restart.
            while True:
                if pos >= len(data):
                    raise _truncated()
                if data[pos] != 0xFF:
                    pos += 1
                    continue
                if pos + 1 >= len(data):
                    raise _truncated()
                nxt = data[pos + 1]
                if nxt == 0x00 or nxt == 0xFF:
                    pos += 1 if nxt == 0xFF else 2
                    continue
                if 0xD0 <= nxt <= 0xD7:
                    pos += 2
                    continue
                break
    smap.truncated = True
    err = TruncatedSegment("no EOI marker before end of buffer")
    err.segment_map = smap
    raise err


def parse_dqt_payload(payload: bytes, segment_offset: int):
    """Parse one DQT payload into DqtRecords (roles left unspecified)."""
    records = []
    pos = 0
    while pos < len(payload):
        pq_tq = payload[pos]
        pq, tq = pq_tq >> 4, pq_tq & 0x0F
        pos += 1
        if pq not in (0, 1):
            raise InvalidPrecision(f"DQT precision nibble {pq} (expected 0 or 1)")
        if tq > 3:
            raise InvalidTableId(f"DQT destination id {tq} (expected 0..3)")
        width = 1 if pq == 0 else 2
        if pos + 64 * width > len(payload):
            raise TruncatedSegment("DQT payload shorter than its table")
        if pq == 0:
            zz = list(payload[pos:pos + 64])
        else:
            zz = [(payload[pos + 2 * i] << 8) | payload[pos + 2 * i + 1] for i in range(64)]
        pos += 64 * width
        table = QuantTable(zigzag_to_natural(zz), precision=8 if pq == 0 else 16)
        records.append(DqtRecord(table, tq, table.precision, segment_offset))
    return records


def _parse_sof(seg: Segment, data: bytes) -> FrameInfo:
    payload = data[seg.payload_start:seg.payload_start + seg.length]
    if len(payload) < 6:
        raise TruncatedSegment("SOF payload too short")
    bit_depth = payload[0]
    height = (payload[1] << 8) | payload[2]
    width = (payload[3] << 8) | payload[4]
    n = payload[5]
    if not 1 <= n <= 4:
        raise UnsupportedFrameType(f"{n} components")
    if width < 1 or height < 1:
        raise UnsupportedFrameType("frame with deferred or zero dimensions")
    if len(payload) < 6 + 3 * n:
        raise TruncatedSegment("SOF payload shorter than its component list")
    comps = []
    for i in range(n):
        cid = payload[6 + 3 * i]
        hv = payload[7 + 3 * i]
        tq = payload[8 + 3 * i]
        comps.append((cid, hv >> 4, hv & 0x0F, tq))
    return FrameInfo(width, height, bit_depth, seg.marker, tuple(comps))


def extract_frame_info(data: bytes) -> FrameInfo:
    """Dimensions and per-component sampling/table bindings from the first SOF."""
    smap = scan_segments(data)
    return _frame_from_map(smap, data)


def _frame_from_map(smap: SegmentMap, data: bytes) -> FrameInfo:
    for seg in smap.segments:
        if seg.marker in SOF_MARKERS:
            if seg.marker in _SOF_DCT_HUFFMAN or seg.marker in _SOF_DCT_ARITHMETIC:
                return _parse_sof(seg, data)
            raise UnsupportedFrameType(f"SOF marker 0xFF{seg.marker:02X}")
    raise NoFrameHeader("no SOF segment found")


def _records_from_map(smap: SegmentMap, data: bytes):
    records = []
    for seg in smap.all(DQT):
        payload = data[seg.payload_start:seg.payload_start + seg.length]
        records.extend(parse_dqt_payload(payload, seg.offset))

    lum_id, chroma_ids = 0, set()
    try:
        frame = _frame_from_map(smap, data)
        lum_id = frame.components[0][3]
        chroma_ids = {c[3] for c in frame.components[1:]} - {lum_id}
    except (NoFrameHeader, UnsupportedFrameType):
        pass

    out = []
    for rec in records:
        if rec.table_id == lum_id:
            role = LUMINANCE
        elif rec.table_id in chroma_ids:
            role = CHROMINANCE
        else:
            role = UNSPECIFIED
        table = QuantTable(rec.table.values, precision=rec.precision, role=role)
        out.append(DqtRecord(table, rec.table_id, rec.precision, rec.segment_offset))
    return out


def extract_dqt(data: bytes):
    """All quantization tables in the stream, in definition order, natural order values.

    Each record's table carries a role derived from the frame header: the
    table id referenced by the first frame component is luminance, ids
    referenced by other components are chrominance. Without a frame header
    id 0 is treated as luminance.
    """
    return _records_from_map(scan_segments(data), data)


def luminance_table(data: bytes) -> QuantTable:
    """The authoritative luminance table: last pre-SOS definition of the bound id."""
    smap = scan_segments(data)
    sos = smap.first(SOS)
    cutoff = sos.offset if sos is not None else len(data)
    lum = [r for r in _records_from_map(smap, data)
           if r.table.role == LUMINANCE and r.segment_offset < cutoff]
    if not lum:
        raise NoFrameHeader("no luminance quantization table found")
    return lum[-1].table
