"""8x8 block DCT with the orthonormal JPEG scaling, plus quantization rounding.

The 2-D transform is separable: F = M B M^T with M the orthonormal DCT-II
matrix, so a constant block of value v yields DC = 8v and zero AC. Blocks
are processed in batches shaped (n, 8, 8) as float64.
"""

from __future__ import annotations

import numpy as np

# Orthonormal 1-D DCT-II basis: row u, column x.
_BASIS = np.zeros((8, 8), dtype=np.float64)
for _u in range(8):
    _scale = np.sqrt(1.0 / 8.0) if _u == 0 else np.sqrt(2.0 / 8.0)
    for _x in range(8):
        _BASIS[_u, _x] = _scale * np.cos((2 * _x + 1) * _u * np.pi / 16.0)
del _u, _x, _scale


def fdct_blocks(blocks: np.ndarray) -> np.ndarray:
    """Forward DCT of level-shifted sample blocks, shape (..., 8, 8) float64."""
    blocks = np.asarray(blocks, dtype=np.float64)
    return _BASIS @ blocks @ _BASIS.T


def idct_blocks(coeffs: np.ndarray) -> np.ndarray:
    """Inverse of :func:`fdct_blocks`."""
    coeffs = np.asarray(coeffs, dtype=np.float64)
    return _BASIS.T @ coeffs @ _BASIS


def fdct_8x8(block) -> np.ndarray:
    """Forward DCT of one block given as 64 level-shifted samples, natural order."""
    block = np.asarray(block, dtype=np.float64).reshape(8, 8)
    return fdct_blocks(block).reshape(64)


def idct_8x8(coeffs) -> np.ndarray:
    """Inverse DCT of one block of 64 coefficients, natural order."""
    coeffs = np.asarray(coeffs, dtype=np.float64).reshape(8, 8)
    return idct_blocks(coeffs).reshape(64)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest with halves away from zero (the quantizer's rounding rule)."""
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def quantize_block(coeffs, table_values) -> np.ndarray:
    """Divide 64 real coefficients by the table steps and round half away from zero."""
    coeffs = np.asarray(coeffs, dtype=np.float64).reshape(64)
    steps = np.asarray(table_values, dtype=np.float64).reshape(64)
    return round_half_away(coeffs / steps).astype(np.int32)


def quantize_blocks(coeffs: np.ndarray, table_values) -> np.ndarray:
    """Batch quantization: coeffs (..., 8, 8), table in natural order."""
    steps = np.asarray(table_values, dtype=np.float64).reshape(8, 8)
    return round_half_away(np.asarray(coeffs) / steps).astype(np.int32)


def dequantize_blocks(levels: np.ndarray, table_values) -> np.ndarray:
    """Multiply quantized levels back to coefficient magnitudes (exact, integer)."""
    steps = np.asarray(table_values, dtype=np.int64).reshape(8, 8)
    return np.asarray(levels, dtype=np.int64) * steps
