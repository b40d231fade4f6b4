"""Canonical Huffman code construction and the four standard JPEG tables.

Tables are given as (bits, values): bits[i] counts the codes of length i+1,
values lists symbols in code order. Codes are assigned canonically
(ascending, shorter first), exactly as decoders rebuild them from DHT.
"""

from __future__ import annotations

from functools import lru_cache

from jpegqt.errors import CorruptStream

STD_DC_LUMINANCE = (
    (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0),
    (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11),
)

STD_DC_CHROMINANCE = (
    (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0),
    (0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11),
)

STD_AC_LUMINANCE = (
    (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125),
    (0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12,
     0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61, 0x07,
     0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08,
     0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52, 0xD1, 0xF0,
     0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16,
     0x17, 0x18, 0x19, 0x1A, 0x25, 0x26, 0x27, 0x28,
     0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39,
     0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
     0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59,
     0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68, 0x69,
     0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79,
     0x7A, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89,
     0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
     0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7,
     0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
     0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5,
     0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3, 0xD4,
     0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2,
     0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9, 0xEA,
     0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
     0xF9, 0xFA),
)

STD_AC_CHROMINANCE = (
    (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119),
    (0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21,
     0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61, 0x71,
     0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91,
     0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33, 0x52, 0xF0,
     0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34,
     0xE1, 0x25, 0xF1, 0x17, 0x18, 0x19, 0x1A, 0x26,
     0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38,
     0x39, 0x3A, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48,
     0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58,
     0x59, 0x5A, 0x63, 0x64, 0x65, 0x66, 0x67, 0x68,
     0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78,
     0x79, 0x7A, 0x82, 0x83, 0x84, 0x85, 0x86, 0x87,
     0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96,
     0x97, 0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5,
     0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
     0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3,
     0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2,
     0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA,
     0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8, 0xE9,
     0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8,
     0xF9, 0xFA),
)


def canonical_codes(bits, values):
    """Assign canonical codes: list of (symbol, code, length) in code order."""
    if sum(bits) > len(values):
        raise CorruptStream("Huffman counts exceed the value list")
    out = []
    code = 0
    idx = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            if code >= (1 << length):
                raise CorruptStream("overfull Huffman code table")
            out.append((values[idx], code, length))
            code += 1
            idx += 1
        code <<= 1
    return out


@lru_cache(maxsize=64)
def encode_table(bits, values) -> dict:
    """symbol -> (code, length) for encoding."""
    return {sym: (code, length) for sym, code, length in canonical_codes(bits, values)}


@lru_cache(maxsize=64)
def decode_table(bits, values):
    """Decoding tables: an 8-bit prefix LUT plus a (length, code) dict slow path.

    The LUT maps every 8-bit window whose prefix is a code of length <= 8 to
    (symbol, length); windows needing longer codes map to None.
    """
    lut = [None] * 256
    longer = {}
    for sym, code, length in canonical_codes(bits, values):
        if length <= 8:
            start = code << (8 - length)
            for k in range(start, start + (1 << (8 - length))):
                lut[k] = (sym, length)
        else:
            longer[(length, code)] = sym
    return tuple(lut), longer


class BitWriter:
    """MSB-first bit accumulator with JPEG byte stuffing (0xFF -> 0xFF 0x00)."""

    def __init__(self):
        self._acc = 0
        self._nbits = 0
        self.data = bytearray()

    def write(self, code: int, length: int) -> None:
        if length == 0:
            return
        self._acc = (self._acc << length) | (code & ((1 << length) - 1))
        self._nbits += length
        while self._nbits >= 8:
            self._nbits -= 8
            byte = (self._acc >> self._nbits) & 0xFF
            self.data.append(byte)
            if byte == 0xFF:
                self.data.append(0x00)
        self._acc &= (1 << self._nbits) - 1

    def flush(self) -> None:
        """Pad the final partial byte with 1-bits."""
        if self._nbits:
            pad = 8 - self._nbits
            self.write((1 << pad) - 1, pad)


class BitReader:
    """MSB-first bit reader over entropy-coded data with byte unstuffing.

    Stops at any marker (0xFF followed by a non-zero byte); requesting bits
    past that point raises CorruptStream.
    """

    def __init__(self, data: bytes, pos: int = 0):
        self._data = data
        self._pos = pos
        self._acc = 0
        self._nbits = 0
        self._at_marker = False

    def _fill(self) -> bool:
        if self._at_marker or self._pos >= len(self._data):
            return False
        byte = self._data[self._pos]
        if byte == 0xFF:
            nxt = self._data[self._pos + 1] if self._pos + 1 < len(self._data) else None
            if nxt == 0x00:
                self._pos += 2
            else:
                self._at_marker = True
                return False
        else:
            self._pos += 1
        self._acc = (self._acc << 8) | byte
        self._nbits += 8
        return True

    def _peek16(self):
        """Next 16 bits left-aligned (1-padded past stream end) and the real count."""
        while self._nbits < 16:
            if not self._fill():
                break
        avail = min(self._nbits, 16)
        if self._nbits >= 16:
            window = (self._acc >> (self._nbits - 16)) & 0xFFFF
        else:
            pad = 16 - self._nbits
            window = ((self._acc << pad) | ((1 << pad) - 1)) & 0xFFFF
        return window, avail

    def _consume(self, n: int) -> None:
        self._nbits -= n
        self._acc &= (1 << self._nbits) - 1

    def read_bits(self, n: int) -> int:
        if n == 0:
            return 0
        while self._nbits < n:
            if not self._fill():
                raise CorruptStream("entropy data exhausted")
        self._nbits -= n
        out = (self._acc >> self._nbits) & ((1 << n) - 1)
        self._acc &= (1 << self._nbits) - 1
        return out

    def read_symbol(self, tables) -> int:
        lut, longer = tables
        window, avail = self._peek16()
        hit = lut[window >> 8]
        if hit is not None:
            sym, length = hit
            if length > avail:
                raise CorruptStream("entropy data exhausted")
            self._consume(length)
            return sym
        for length in range(9, 17):
            sym = longer.get((length, window >> (16 - length)))
            if sym is not None:
                if length > avail:
                    raise CorruptStream("entropy data exhausted")
                self._consume(length)
                return sym
        raise CorruptStream("invalid Huffman code")

    def align_to_byte(self) -> None:
        self._nbits = 0
        self._acc = 0

    def next_marker(self):
        """At a byte boundary, return the marker code if positioned at one."""
        if self._at_marker:
            if self._pos + 1 < len(self._data):
                return self._data[self._pos + 1]
            return None
        if self._pos + 1 < len(self._data) and self._data[self._pos] == 0xFF:
            nxt = self._data[self._pos + 1]
            if nxt != 0x00:
                return nxt
        return None

    def skip_marker(self) -> None:
        self._pos += 2
        self._at_marker = False

    @property
    def pos(self) -> int:
        return self._pos


def magnitude_category(value: int) -> int:
    """Number of bits needed for a coefficient magnitude (JPEG SSSS category)."""
    return abs(value).bit_length()


def magnitude_bits(value: int, category: int) -> int:
    """Two's-complement-style magnitude bits JPEG appends after the symbol."""
    if value >= 0:
        return value
    return value + (1 << category) - 1


def extend_magnitude(bits: int, category: int) -> int:
    """Inverse of :func:`magnitude_bits`."""
    if category == 0:
        return 0
    if bits < (1 << (category - 1)):
        return bits - (1 << category) + 1
    return bits
