"""Synthetic test corpus generation: document-like images, table-diverse
corpora, double-compression halves, and ELA splice fixtures.

All content is derived from counter-mode SplitMix64, so a (seed, size)
pair always produces the same bytes on any platform.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from jpegqt.codec import EncodeParams, decode, encode
from jpegqt.image import GRAYSCALE, RGB, PixelImage, write_pgm
from jpegqt.qtables import CHROMINANCE, LUMINANCE, QuantTable, standard_table
from jpegqt.rng import SplitMix64, counter_uniform


def synth_gray(width: int, height: int, seed: int) -> np.ndarray:
    """Document-like grayscale content: pale page with gentle shading,
    antialiased text-like strokes, a form box, and scanner noise."""
    n = width * height
    u = counter_uniform(seed, 2 * n)
    yy = np.arange(height)[:, None] / max(height - 1, 1)
    xx = np.arange(width)[None, :] / max(width - 1, 1)
    page = 206.0 + 22.0 * u[:n].reshape(height, width) * 0.4 + 8.0 * np.sin(
        2.2 * np.pi * (0.3 * yy + 0.7 * xx))

    # Horizontal "text" strokes on a line grid; intensity varies along the
    # run and a soft second row fakes antialiasing.
    rng = SplitMix64(seed ^ 0xD0C5)
    y = 6
    while y < height - 4:
        x = rng.randint(2, 10)
        while x < width - 4:
            run = rng.randint(3, 14)
            end = min(x + run, width)
            shade = rng.randint(25, 95) + 0.1 * rng.randint(0, 9)
            ramp = np.linspace(0.0, rng.randint(0, 14), end - x)
            page[y, x:end] = shade + ramp
            page[y + 1, x:end] = 0.55 * (shade + ramp) + 0.45 * page[y + 1, x:end]
            x += run + rng.randint(2, 8)
        y += rng.randint(9, 14)

    # A framed box, as forms tend to have.
    if width >= 32 and height >= 32:
        bx, by = width // 5, height // 5
        frame = 55.0 + 0.2 * rng.randint(0, 40)
        page[by, bx:width - bx] = frame
        page[height - by, bx:width - bx] = frame + 2.5
        page[by:height - by, bx] = frame + 1.2
        page[by:height - by + 1, width - bx] = frame + 3.1
    noise = (u[n:2 * n].reshape(height, width) - 0.5) * 14.0
    return np.clip(page + noise, 0, 255).astype(np.uint8)


def synth_color(width: int, height: int, seed: int) -> np.ndarray:
    """Colored variant: tinted page with the same stroke structure."""
    gray = synth_gray(width, height, seed).astype(np.float64)
    rng = SplitMix64(seed ^ 0xC0102)
    tint = np.array([rng.randint(-18, 4), rng.randint(-12, 8), rng.randint(-20, 12)],
                    dtype=np.float64)
    rgb = gray[..., None] + tint[None, None, :]
    return np.clip(rgb, 0, 255).astype(np.uint8)


def synth_image(width: int, height: int, seed: int, color: bool) -> PixelImage:
    if color:
        return PixelImage(synth_color(width, height, seed), RGB)
    return PixelImage(synth_gray(width, height, seed), GRAYSCALE)


def perturbed_table(quality: int, seed: int, n_edits: int = 3) -> QuantTable:
    """A non-standard table: a standard one with a few deterministic edits."""
    rng = SplitMix64(seed)
    values = list(standard_table(quality, LUMINANCE).values)
    for _ in range(n_edits):
        i = rng.randint(0, 63)
        delta = rng.randint(1, 4) * (1 if rng.randint(0, 1) else -1)
        values[i] = min(max(values[i] + delta, 1), 255)
    return QuantTable(tuple(values), precision=8, role=LUMINANCE)


def _encode_with(img: PixelImage, lum: QuantTable, subsampling: str = "420") -> bytes:
    from jpegqt.qtables import estimate_quality

    q, _, _ = estimate_quality(lum, LUMINANCE)
    return encode(img, EncodeParams(
        luminance=lum,
        chrominance=standard_table(q, CHROMINANCE),
        subsampling=subsampling,
    ))


def make_corpus(out_dir, n_files: int, seed: int, nested: bool = True) -> list:
    """Mixed synthetic corpus: varied sizes, colors, standard and non-standard tables.

    Returns the relative paths written (forward slashes).
    """
    os.makedirs(out_dir, exist_ok=True)
    rng = SplitMix64(seed)
    rels = []
    for i in range(n_files):
        w = 8 * rng.randint(5, 12)
        h = 8 * rng.randint(5, 12)
        color = rng.randint(0, 2) > 0
        img = synth_image(w, h, rng.next64(), color)
        q = rng.randint(35, 95)
        if rng.randint(0, 3) == 0:
            lum = perturbed_table(q, rng.next64())
        else:
            lum = standard_table(q, LUMINANCE)
        sub = "420" if color and rng.randint(0, 1) else "444"
        data = _encode_with(img, lum, sub)
        subdir = f"batch{i % 3}" if nested else ""
        rel = f"{subdir}/doc_{i:04d}.jpg" if subdir else f"doc_{i:04d}.jpg"
        full = os.path.join(out_dir, rel.replace("/", os.sep))
        os.makedirs(os.path.dirname(full) or ".", exist_ok=True)
        with open(full, "wb") as fh:
            fh.write(data)
        rels.append(rel)
    return rels


def make_distinct_table_corpus(out_dir, k: int, files_per_table: int, seed: int) -> list:
    """Corpus whose luminance tables form exactly k distinct values."""
    os.makedirs(out_dir, exist_ok=True)
    rng = SplitMix64(seed)
    tables = []
    qualities = list(range(40, 40 + k))
    for j, q in enumerate(qualities):
        tables.append(standard_table(q, LUMINANCE) if j % 2 == 0
                      else perturbed_table(q, seed + j))
    rels = []
    i = 0
    for table in tables:
        for _ in range(files_per_table):
            img = synth_image(8 * rng.randint(5, 8), 8 * rng.randint(5, 8), rng.next64(),
                              color=False)
            rel = f"t{i:04d}.jpg"
            with open(os.path.join(out_dir, rel), "wb") as fh:
                fh.write(_encode_with(img, table, "444"))
            rels.append(rel)
            i += 1
    return rels


@dataclass(frozen=True)
class DoubleHalfFixture:
    """Left half double-compressed (q1 then q2), right half single-compressed (q2)."""

    data: bytes
    mask: np.ndarray  # True where tampered (the fresh right half)
    q1: int
    q2: int


def make_double_half(seed: int, q1: int, q2: int, width: int = 160, height: int = 160) -> DoubleHalfFixture:
    base = synth_image(width, height, seed, color=False)
    first = decode(encode(base, EncodeParams(
        luminance=standard_table(q1, LUMINANCE), subsampling="444")))
    fresh = synth_gray(width, height, seed ^ 0xFE11)
    split = (width // 2 // 8) * 8  # cut on a block boundary
    composite = first.pixels.copy()
    composite[:, split:] = fresh[:, split:]
    data = encode(PixelImage(composite, GRAYSCALE), EncodeParams(
        luminance=standard_table(q2, LUMINANCE), subsampling="444"))
    mask = np.zeros((height, width), dtype=bool)
    mask[:, split:] = True
    return DoubleHalfFixture(data, mask, q1, q2)


def double_pairs(seed: int, n: int, min_gap: int = 15) -> list:
    """n seeded (q1, q2) standard pairs with q2 - q1 >= min_gap.

    The re-save is always at the higher quality: that is the regime where
    the primary lattice survives the second quantization.
    """
    rng = SplitMix64(seed)
    pairs = []
    for _ in range(n):
        q1 = rng.randint(30, 100 - min_gap)
        q2 = rng.randint(q1 + min_gap, 100)
        pairs.append((q1, q2))
    return pairs


@dataclass(frozen=True)
class SpliceFixture:
    """A patch with a fine-quantization history inside a coarse-history page."""

    data: bytes
    patch_mask: np.ndarray  # True inside the pasted patch


def make_ela_splice(seed: int, width: int = 128, height: int = 128,
                    host_q: int = 60, patch_q: int = 95, final_q: int = 95) -> SpliceFixture:
    base = synth_image(width, height, seed, color=False)
    host = decode(encode(base, EncodeParams(
        luminance=standard_table(host_q, LUMINANCE), subsampling="444"))).pixels.copy()
    patch_src = decode(encode(base, EncodeParams(
        luminance=standard_table(patch_q, LUMINANCE), subsampling="444"))).pixels
    y0, y1 = height // 4, height // 4 + height // 3
    x0, x1 = width // 4, width // 4 + width // 3
    host[y0:y1, x0:x1] = patch_src[y0:y1, x0:x1]
    data = encode(PixelImage(host, GRAYSCALE), EncodeParams(
        luminance=standard_table(final_q, LUMINANCE), subsampling="444"))
    mask = np.zeros((height, width), dtype=bool)
    mask[y0:y1, x0:x1] = True
    return SpliceFixture(data, mask)


def write_mask_pgm(path, mask: np.ndarray) -> None:
    write_pgm(path, np.where(mask, 255, 0).astype(np.uint8))


def generate_suite(out_dir, seed: int, corpus_files: int = 40, dq_fixtures: int = 6) -> dict:
    """The full synthetic suite: corpus/, dq/ JPEGs, masks/, ela/.

    Returns a summary dict of what went where.
    """
    corpus_dir = os.path.join(out_dir, "corpus")
    dq_dir = os.path.join(out_dir, "dq")
    mask_dir = os.path.join(out_dir, "masks")
    ela_dir = os.path.join(out_dir, "ela")
    for d in (corpus_dir, dq_dir, mask_dir, ela_dir):
        os.makedirs(d, exist_ok=True)

    corpus = make_corpus(corpus_dir, corpus_files, seed)

    rng = SplitMix64(seed ^ 0xF1C5)
    pairs = double_pairs(seed ^ 0xD0, dq_fixtures)
    dq_names = []
    for i, (q1, q2) in enumerate(pairs):
        fx = make_double_half(rng.next64(), q1, q2)
        name = f"dq_{i:02d}"
        with open(os.path.join(dq_dir, name + ".jpg"), "wb") as fh:
            fh.write(fx.data)
        write_mask_pgm(os.path.join(mask_dir, name + ".pgm"), fx.mask)
        dq_names.append(name)

    splice = make_ela_splice(seed ^ 0xE1A)
    with open(os.path.join(ela_dir, "splice.jpg"), "wb") as fh:
        fh.write(splice.data)
    write_mask_pgm(os.path.join(mask_dir, "splice.pgm"), splice.patch_mask)

    return {
        "corpus": corpus,
        "dq": dq_names,
        "pairs": pairs,
        "ela": ["splice"],
    }
