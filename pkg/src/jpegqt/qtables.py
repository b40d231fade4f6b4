"""Quantization tables: value type, zigzag ordering, standard-table family,
fingerprinting, and nearest-standard-quality estimation.

Tables live in natural row-major order everywhere in this package (row index
= vertical DCT frequency); the zigzag permutation appears only at the
bitstream boundary, where DQT segments store entries in zigzag order.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from fractions import Fraction

from jpegqt.errors import EntryOutOfRange

LUMINANCE = "luminance"
CHROMINANCE = "chrominance"
UNSPECIFIED = "unspecified"

_ROLES = (LUMINANCE, CHROMINANCE, UNSPECIFIED)

# Zigzag position -> natural (row-major) index.
_ZIGZAG_TO_NATURAL = (
    0, 1, 8, 16, 9, 2, 3, 10,
    17, 24, 32, 25, 18, 11, 4, 5,
    12, 19, 26, 33, 40, 48, 41, 34,
    27, 20, 13, 6, 7, 14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36,
    29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46,
    53, 60, 61, 54, 47, 55, 62, 63,
)

_NATURAL_TO_ZIGZAG = tuple(
    _ZIGZAG_TO_NATURAL.index(i) for i in range(64)
)

# Reference (quality 50) matrices the whole standard family is scaled from.
BASE_LUMINANCE = (
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
)

BASE_CHROMINANCE = (
    17, 18, 24, 47, 99, 99, 99, 99,
    18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99,
    47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99,
)


def zigzag_order() -> tuple:
    """Map zigzag position -> natural index for the 8x8 zigzag walk."""
    return _ZIGZAG_TO_NATURAL


def natural_order() -> tuple:
    """Inverse of :func:`zigzag_order`: natural index -> zigzag position."""
    return _NATURAL_TO_ZIGZAG


def zigzag_to_natural(values):
    """Reorder 64 zigzag-ordered entries into natural row-major order."""
    out = [0] * 64
    for zz, v in enumerate(values):
        out[_ZIGZAG_TO_NATURAL[zz]] = v
    return tuple(out)


def natural_to_zigzag(values):
    """Reorder 64 natural-order entries into zigzag (bitstream) order."""
    return tuple(values[_ZIGZAG_TO_NATURAL[zz]] for zz in range(64))


@dataclass(frozen=True)
class QuantTable:
    """An 8x8 quantization matrix in natural row-major order.

    ``role`` is bookkeeping only: it never participates in equality or
    fingerprinting, so the same numbers parsed as luminance or chrominance
    compare equal.
    """

    values: tuple
    precision: int = 8
    role: str = field(default=UNSPECIFIED, compare=False)

    def __post_init__(self):
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != 64:
            raise EntryOutOfRange(f"expected 64 entries, got {len(values)}")
        if self.precision not in (8, 16):
            raise EntryOutOfRange(f"precision must be 8 or 16, got {self.precision}")
        limit = 255 if self.precision == 8 else 65535
        for v in values:
            if not 1 <= v <= limit:
                raise EntryOutOfRange(f"entry {v} outside [1, {limit}] for {self.precision}-bit table")
        if self.role not in _ROLES:
            raise ValueError(f"unknown role {self.role!r}")

    def max_entry(self) -> int:
        return max(self.values)

    def as_rows(self):
        return [self.values[r * 8:(r + 1) * 8] for r in range(8)]

    def render(self) -> str:
        """8 lines of 8 space-separated integers, natural order."""
        width = len(str(self.max_entry()))
        return "\n".join(
            " ".join(str(v).rjust(width) for v in row) for row in self.as_rows()
        )


def fingerprint(table: QuantTable) -> str:
    """Content digest of a table: lowercase hex SHA-256 string.

    The digest covers exactly one precision byte (8 or 16) followed by the
    64 natural-order entries as big-endian 16-bit integers. The role and the
    source file never enter the hash, so equal tables always collide and
    the digest is stable across platforms and releases.
    """
    h = hashlib.sha256()
    h.update(bytes([table.precision]))
    for v in table.values:
        h.update(v.to_bytes(2, "big"))
    return h.hexdigest()


def standard_table(quality: int, role: str = LUMINANCE) -> QuantTable:
    """Reference table scaled to an integer quality factor in [1, 100].

    Uses the libjpeg convention: scale = 5000/q below 50, else 200 - 2q;
    each entry is floor((base*scale + 50)/100) clamped into [1, 255].
    """
    if not 1 <= int(quality) <= 100:
        raise ValueError(f"quality factor {quality} outside [1, 100]")
    quality = int(quality)
    if role == LUMINANCE:
        base = BASE_LUMINANCE
    elif role == CHROMINANCE:
        base = BASE_CHROMINANCE
    else:
        raise ValueError(f"role must be luminance or chrominance, got {role!r}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    values = tuple(min(max((b * scale + 50) // 100, 1), 255) for b in base)
    return QuantTable(values, precision=8, role=role)


def estimate_quality(table: QuantTable, role: str = LUMINANCE):
    """Nearest standard quality factor by mean absolute difference.

    Returns ``(quality, distance, exact)`` where distance is an exact
    Fraction (total absolute difference / 64) and ties break toward the
    larger quality factor.
    """
    best_q = None
    best_total = None
    for q in range(1, 101):
        ref = standard_table(q, role)
        total = sum(abs(a - b) for a, b in zip(table.values, ref.values))
        if best_total is None or total <= best_total:
            best_total = total
            best_q = q
    distance = Fraction(best_total, 64)
    return best_q, distance, best_total == 0


def is_standard(table: QuantTable, role: str = LUMINANCE):
    """Largest quality factor whose standard table equals this one exactly, else None."""
    for q in range(100, 0, -1):
        if table == standard_table(q, role):
            return q
    return None
