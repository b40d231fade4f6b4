"""Deterministic random numbers via SplitMix64.

Every randomized step in the toolkit draws from SplitMix64 (Steele, Lea &
Flood's 64-bit mixer), chosen because it is a fixed published algorithm a
few lines long: streams reproduce bit-for-bit on any platform, Python
version, or library upgrade, which is what seed-stamped manifests require.

The generator is counter-based: output i is ``mix64(seed + (i+1)*GAMMA)``,
so a stream can also be evaluated in bulk with vectorized uint64 math.
"""

from __future__ import annotations

import hashlib

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a 64-bit integer."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential SplitMix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix64(self._state)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi], unbiased via rejection."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        limit = ((1 << 64) // span) * span
        while True:
            r = self.next64()
            if r < limit:
                return lo + r % span

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next64() >> 11) * 2.0 ** -53

    def choice_weighted(self, weights) -> int:
        """Index drawn with probability proportional to the given positive weights."""
        total = sum(weights)
        if total <= 0:
            raise ValueError("weights must sum to a positive value")
        r = self.randint(0, total - 1)
        acc = 0
        for i, w in enumerate(weights):
            acc += w
            if r < acc:
                return i
        raise AssertionError("unreachable")


def counter_bits(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Vectorized counter-mode SplitMix64: the same stream SplitMix64(seed) yields.

    Returns uint64 outputs ``offset .. offset+count-1`` of the stream.
    """
    idx = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + idx * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


def counter_uniform(seed: int, count: int, offset: int = 0) -> np.ndarray:
    """Vectorized uniform floats in [0, 1), matching SplitMix64(seed).uniform()."""
    return (counter_bits(seed, count, offset) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def per_file_seed(master_seed: int, relpath: str) -> int:
    """Stable 64-bit seed for one file: SHA-256 of the master seed and its relative path.

    The path is normalized to forward slashes so seeds do not depend on the
    host platform's separator.
    """
    canon = relpath.replace("\\", "/")
    h = hashlib.sha256()
    h.update((master_seed & _MASK).to_bytes(8, "big"))
    h.update(b"\x00")
    h.update(canon.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")
