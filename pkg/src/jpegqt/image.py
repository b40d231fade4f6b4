"""Pixel images and binary PGM/PPM readers and writers.

PixelImage is the decoder output / encoder input: 8-bit samples, grayscale
or RGB. PGM (P5) carries grayscale, PPM (P6) carries RGB; both binary,
maxval 255. 16-bit PGM (maxval 65535, big-endian samples) is the
interchange format for probability maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GRAYSCALE = "grayscale"
RGB = "rgb"


@dataclass(frozen=True)
class PixelImage:
    """8-bit image: planes shaped (H, W) for grayscale or (H, W, 3) for RGB."""

    pixels: np.ndarray
    color_model: str

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.uint8)
        object.__setattr__(self, "pixels", px)
        if self.color_model == GRAYSCALE:
            if px.ndim != 2:
                raise ValueError(f"grayscale image must be 2-D, got shape {px.shape}")
        elif self.color_model == RGB:
            if px.ndim != 3 or px.shape[2] != 3:
                raise ValueError(f"RGB image must be (H, W, 3), got shape {px.shape}")
        else:
            raise ValueError(f"unknown color model {self.color_model!r}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image dimensions must be >= 1")

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def _read_pnm_header(data: bytes, magic: bytes):
    """Parse a PNM header, returning (width, height, maxval, pixel offset)."""
    if not data.startswith(magic):
        raise ValueError(f"not a {magic.decode()} file")
    # Header tokens may be separated by any whitespace and '#' comments.
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PNM header")
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace byte after maxval
    return fields[0], fields[1], fields[2], pos


def decode_pgm(data: bytes) -> np.ndarray:
    """Parse binary PGM bytes. Returns uint8 (H, W) for maxval<=255, uint16 otherwise."""
    width, height, maxval, pos = _read_pnm_header(data, b"P5")
    if maxval <= 255:
        raw = np.frombuffer(data, dtype=np.uint8, count=width * height, offset=pos)
    else:
        raw = np.frombuffer(data, dtype=">u2", count=width * height, offset=pos).astype(np.uint16)
    return raw.reshape(height, width)


def read_pgm(path) -> np.ndarray:
    return decode_pgm(open(path, "rb").read())


def write_pgm(path, samples: np.ndarray, maxval: int = 255) -> None:
    samples = np.asarray(samples)
    if samples.ndim != 2:
        raise ValueError("PGM expects a 2-D array")
    header = f"P5\n{samples.shape[1]} {samples.shape[0]}\n{maxval}\n".encode()
    if maxval <= 255:
        body = samples.astype(np.uint8).tobytes()
    else:
        body = samples.astype(">u2").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + body)


def decode_ppm(data: bytes) -> np.ndarray:
    width, height, maxval, pos = _read_pnm_header(data, b"P6")
    if maxval > 255:
        raise ValueError("only 8-bit PPM is supported")
    raw = np.frombuffer(data, dtype=np.uint8, count=width * height * 3, offset=pos)
    return raw.reshape(height, width, 3)


def read_ppm(path) -> np.ndarray:
    return decode_ppm(open(path, "rb").read())


def write_ppm(path, pixels: np.ndarray) -> None:
    pixels = np.asarray(pixels, dtype=np.uint8)
    if pixels.ndim != 3 or pixels.shape[2] != 3:
        raise ValueError("PPM expects an (H, W, 3) array")
    header = f"P6\n{pixels.shape[1]} {pixels.shape[0]}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header + pixels.tobytes())


def pixels_from_pnm(data: bytes) -> PixelImage:
    """Parse PGM or PPM bytes into a PixelImage by magic."""
    if data.startswith(b"P5"):
        arr = decode_pgm(data)
        if arr.dtype != np.uint8:
            raise ValueError("16-bit PGM is a probability map, not a pixel image")
        return PixelImage(arr, GRAYSCALE)
    if data.startswith(b"P6"):
        return PixelImage(decode_ppm(data), RGB)
    raise ValueError(f"unsupported image magic {data[:2]!r}")


def load_image(path) -> PixelImage:
    """Load PGM or PPM into a PixelImage by magic bytes."""
    return pixels_from_pnm(open(path, "rb").read())


def save_image(path, img: PixelImage) -> None:
    if img.color_model == GRAYSCALE:
        write_pgm(path, img.pixels)
    else:
        write_ppm(path, img.pixels)
