"""Recompression pipelines and the three-condition corpus materializer.

Three conditions: ``orig`` copies bytes unchanged, ``std`` re-encodes with a
standard table at a quality factor drawn uniformly from a range, ``real``
re-encodes with a luminance table sampled from a bank. Every file gets its
own seed derived from (master seed, relative path), so outputs never depend
on traversal order, parallelism, or sibling files.
"""

from __future__ import annotations

import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from jpegqt import __version__
from jpegqt.bank import QtBank, sample_table
from jpegqt.codec import EncodeParams, decode, encode
from jpegqt.errors import ToolkitError, UnreadableRoot
from jpegqt.image import GRAYSCALE, RGB, PixelImage, pixels_from_pnm
from jpegqt.parse import JPEG_MAGIC
from jpegqt.qtables import CHROMINANCE, LUMINANCE, estimate_quality, fingerprint, standard_table
from jpegqt.rng import SplitMix64, per_file_seed

DEFAULT_SEED = 1789

PNG_MAGIC = b"\x89PNG"

ORIG = "orig"
STD = "std"
REAL = "real"


@dataclass(frozen=True)
class PipelineSpec:
    kind: str
    master_seed: int = DEFAULT_SEED
    qf_low: int = 30
    qf_high: int = 100
    bank_path: str | None = None
    weighting: str = "uniform"
    subsampling: str = "420"

    def __post_init__(self):
        if self.kind not in (ORIG, STD, REAL):
            raise ValueError(f"condition must be orig, std, or real, got {self.kind!r}")
        if not (1 <= self.qf_low <= self.qf_high <= 100):
            raise ValueError(f"bad quality range [{self.qf_low}, {self.qf_high}]")
        if self.weighting not in ("uniform", "frequency"):
            raise ValueError(f"weighting must be uniform or frequency, got {self.weighting!r}")


@dataclass(frozen=True)
class ManifestRow:
    input: str
    output: str
    condition: str
    parameter: str
    seed: int
    error: str = ""


@dataclass
class Manifest:
    header: dict
    rows: list = field(default_factory=list)

    def to_csv(self) -> str:
        lines = [f"# {k}={v}" for k, v in self.header.items()]
        lines.append("input,output,condition,parameter,seed,error")
        for r in sorted(self.rows, key=lambda r: r.input):
            error = r.error.replace(",", ";").replace("\n", " ")
            lines.append(f"{r.input},{r.output},{r.condition},{r.parameter},{r.seed},{error}")
        return "\n".join(lines) + "\n"


def load_source(data: bytes) -> PixelImage:
    """Decode a JPEG, PNG, PGM, or PPM byte buffer into pixels."""
    if data.startswith(JPEG_MAGIC):
        return decode(data)
    if data.startswith(PNG_MAGIC):
        from PIL import Image

        with Image.open(io.BytesIO(data)) as im:
            if im.mode in ("L", "1", "I;16"):
                return PixelImage(np.asarray(im.convert("L")), GRAYSCALE)
            return PixelImage(np.asarray(im.convert("RGB")), RGB)
    if data.startswith(b"P5") or data.startswith(b"P6"):
        return pixels_from_pnm(data)
    raise ToolkitError("unsupported source format (need JPEG, PNG, PGM, or PPM)")


def recompress_standard(img_bytes: bytes, file_seed: int, spec: PipelineSpec):
    """Re-encode with the standard table pair at a seeded uniform quality factor."""
    rng = SplitMix64(file_seed)
    q = rng.randint(spec.qf_low, spec.qf_high)
    img = load_source(img_bytes)
    params = EncodeParams(
        luminance=standard_table(q, LUMINANCE),
        chrominance=standard_table(q, CHROMINANCE),
        subsampling=spec.subsampling,
    )
    return encode(img, params), q


def recompress_real(img_bytes: bytes, file_seed: int, spec: PipelineSpec, bank: QtBank):
    """Re-encode with a bank-sampled luminance table.

    The bank holds luminance tables only, so the chrominance side uses the
    standard table at the sampled table's nearest standard quality; that
    choice is recorded in the manifest header.
    """
    rng = SplitMix64(file_seed)
    lum = sample_table(bank, rng, spec.weighting)
    q, _, _ = estimate_quality(lum, LUMINANCE)
    img = load_source(img_bytes)
    params = EncodeParams(
        luminance=lum,
        chrominance=standard_table(q, CHROMINANCE),
        subsampling=spec.subsampling,
    )
    return encode(img, params), fingerprint(lum)


def _discover_inputs(input_dir):
    if not os.path.isdir(input_dir):
        raise UnreadableRoot(f"not a readable directory: {input_dir}")
    rels = []
    for dirpath, dirnames, filenames in os.walk(input_dir):
        dirnames.sort()
        for name in filenames:
            full = os.path.join(dirpath, name)
            try:
                with open(full, "rb") as fh:
                    magic = fh.read(4)
            except OSError:
                continue
            if (magic.startswith(JPEG_MAGIC) or magic.startswith(PNG_MAGIC)
                    or magic.startswith(b"P5") or magic.startswith(b"P6")):
                rels.append(os.path.relpath(full, input_dir).replace(os.sep, "/"))
    return sorted(rels)


def _output_rel(rel: str, kind: str) -> str:
    if kind == ORIG:
        return rel
    if "." in os.path.basename(rel):
        return rel.rsplit(".", 1)[0] + ".jpg"
    return rel + ".jpg"


def _process_one(input_dir, output_dir, rel, spec: PipelineSpec, bank):
    seed = per_file_seed(spec.master_seed, rel)
    src_path = os.path.join(input_dir, rel.replace("/", os.sep))
    try:
        with open(src_path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        return ManifestRow(rel, "", spec.kind, "", seed, error=str(e))

    if spec.kind == ORIG:
        out_bytes, parameter = data, ""
    else:
        try:
            if spec.kind == STD:
                out_bytes, q = recompress_standard(data, seed, spec)
                parameter = str(q)
            else:
                out_bytes, fp = recompress_real(data, seed, spec, bank)
                parameter = fp
        except ToolkitError as e:
            return ManifestRow(rel, "", spec.kind, "", seed, error=str(e) or type(e).__name__)

    out_rel = _output_rel(rel, spec.kind)
    dst_path = os.path.join(output_dir, out_rel.replace("/", os.sep))
    os.makedirs(os.path.dirname(dst_path) or ".", exist_ok=True)
    with open(dst_path, "wb") as fh:
        fh.write(out_bytes)
    return ManifestRow(rel, out_rel, spec.kind, parameter, seed)


def materialize_condition(input_dir, output_dir, spec: PipelineSpec,
                          bank: QtBank | None = None, threads: int = 1) -> Manifest:
    """Apply one condition to a whole tree, mirroring its structure.

    Per-file failures become error rows; the run continues. The returned
    manifest is sorted by input path and byte-deterministic for a fixed
    (spec, inputs) regardless of thread count.
    """
    if spec.kind == REAL and (bank is None or not bank.entries):
        from jpegqt.errors import EmptyBank

        raise EmptyBank("real condition requires a non-empty bank")
    rels = _discover_inputs(input_dir)
    os.makedirs(output_dir, exist_ok=True)

    # Distinct inputs whose output names would collide (a.png vs a.jpg under
    # re-encoding) keep only the first in path order; the rest get error rows.
    taken = set()
    runnable = []
    collisions = []
    for rel in rels:
        out_rel = _output_rel(rel, spec.kind)
        if out_rel in taken:
            collisions.append(ManifestRow(
                rel, "", spec.kind, "", per_file_seed(spec.master_seed, rel),
                error=f"output name collides with another input ({out_rel})"))
        else:
            taken.add(out_rel)
            runnable.append(rel)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(
                lambda rel: _process_one(input_dir, output_dir, rel, spec, bank), runnable))
    else:
        rows = [_process_one(input_dir, output_dir, rel, spec, bank) for rel in runnable]
    rows.extend(collisions)

    header = {
        "toolkit": f"jpegqt {__version__}",
        "condition": spec.kind,
        "master_seed": spec.master_seed,
        "subsampling": spec.subsampling,
    }
    if spec.kind == STD:
        header["qf_range"] = f"{spec.qf_low}:{spec.qf_high}"
    if spec.kind == REAL:
        header["weighting"] = spec.weighting
        header["bank"] = os.path.basename(spec.bank_path) if spec.bank_path else ""
        header["chroma_rule"] = "standard table at the sampled table's nearest standard quality"
    return Manifest(header, rows)


def write_manifest(manifest: Manifest, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(manifest.to_csv())
