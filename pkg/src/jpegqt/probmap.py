"""Pixel-level probability maps and their 16-bit PGM interchange format.

A map stores p(i,j) in [0,1] per pixel; on disk it is a binary PGM with
maxval 65535 where p = stored value / 65535.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from jpegqt.image import read_pgm, write_pgm


@dataclass(frozen=True)
class ProbMap:
    values: np.ndarray  # (H, W) float64 in [0, 1]

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", arr)
        if arr.ndim != 2:
            raise ValueError(f"probability map must be 2-D, got shape {arr.shape}")
        if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
            raise ValueError("probability values outside [0, 1]")

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def write_probmap(path, pm: ProbMap) -> None:
    quantized = np.rint(pm.values * 65535.0).astype(np.uint16)
    write_pgm(path, quantized, maxval=65535)


def read_probmap(path) -> ProbMap:
    raw = read_pgm(path)
    return ProbMap(raw.astype(np.float64) / 65535.0)
