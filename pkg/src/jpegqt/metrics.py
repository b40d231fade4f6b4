"""Pixel-level localization metrics: thresholding, TP/FP/FN counting,
F1, IoU, the false-positive pixel rate, and per-directory evaluation with
per-image averaging.

Probability maps arrive as 16-bit PGM (p = value / 65535), ground-truth
masks as 8-bit PGM where >= 128 means tampered.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from jpegqt.errors import DimensionMismatch, NoPairs
from jpegqt.image import read_pgm
from jpegqt.probmap import ProbMap, read_probmap

TAMPERED = "tampered"
UNALTERED = "unaltered"

FLAG_EMPTY_BOTH = "empty_gt_empty_pred"
FLAG_DIM_MISMATCH = "dimension_mismatch"


def binarize(pm, tau: float = 0.5) -> np.ndarray:
    """Threshold a probability map: mask(i,j) = 1 iff p(i,j) >= tau (inclusive)."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"threshold {tau} outside [0, 1]")
    values = pm.values if isinstance(pm, ProbMap) else np.asarray(pm, dtype=np.float64)
    return values >= tau


def read_mask(path) -> np.ndarray:
    """Ground-truth mask: 8-bit PGM, sample >= 128 is a positive pixel."""
    raw = read_pgm(path)
    return raw.astype(np.uint16) >= 128


@dataclass(frozen=True)
class PixelCounts:
    tp: int
    fp: int
    fn: int


def pixel_counts(pred: np.ndarray, gt: np.ndarray) -> PixelCounts:
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"prediction {pred.shape} vs ground truth {gt.shape}")
    tp = int(np.count_nonzero(pred & gt))
    fp = int(np.count_nonzero(pred & ~gt))
    fn = int(np.count_nonzero(~pred & gt))
    return PixelCounts(tp, fp, fn)


def f1_iou(c: PixelCounts):
    """F1 = 2tp/(2tp+fp+fn), IoU = tp/(tp+fp+fn).

    All three counts zero (empty truth met by empty prediction) scores a
    perfect (1, 1); evaluate_set flags such rows for auditability.
    """
    denom = 2 * c.tp + c.fp + c.fn
    if denom == 0:
        return 1.0, 1.0
    f1 = 2 * c.tp / denom
    iou = c.tp / (c.tp + c.fp + c.fn)
    return f1, iou


def fpr_pix(pred: np.ndarray) -> float:
    """Positive-pixel fraction: on unaltered content every positive is false."""
    pred = np.asarray(pred, dtype=bool)
    return np.count_nonzero(pred) / pred.size


@dataclass
class ImageRow:
    image_id: str
    condition: str
    tp: int | None = None
    fp: int | None = None
    fn: int | None = None
    f1: float | None = None
    iou: float | None = None
    fpr: float | None = None
    flags: str = ""


@dataclass
class MetricsReport:
    condition: str
    tau: float
    mode: str  # tampered | unaltered
    rows: list = field(default_factory=list)
    unmatched_pred: list = field(default_factory=list)
    unmatched_gt: list = field(default_factory=list)
    mean_f1: float | None = None
    mean_iou: float | None = None
    mean_fpr: float | None = None

    def scored_rows(self):
        return [r for r in self.rows if FLAG_DIM_MISMATCH not in r.flags]

    def to_csv(self) -> str:
        lines = ["image_id,condition,tp,fp,fn,f1,iou,fpr_pix,flags"]
        for r in self.rows:
            cells = [r.image_id, r.condition]
            cells += ["" if v is None else str(v) for v in (r.tp, r.fp, r.fn)]
            cells += ["" if v is None else repr(float(v)) for v in (r.f1, r.iou, r.fpr)]
            cells.append(r.flags)
            lines.append(",".join(cells))
        means = ["mean", self.condition, "", "", ""]
        means += ["" if v is None else repr(float(v)) for v in (self.mean_f1, self.mean_iou, self.mean_fpr)]
        means.append("")
        lines.append(",".join(means))
        return "\n".join(lines) + "\n"


def _stems(directory, suffix=".pgm"):
    out = {}
    for name in sorted(os.listdir(directory)):
        if not name.lower().endswith(suffix):
            continue
        stem = name[: -len(suffix)]
        if stem in out:
            raise ValueError(f"duplicate stem {stem!r} in {directory}")
        out[stem] = os.path.join(directory, name)
    return out


def evaluate_set(pred_dir, gt_dir=None, tau: float = 0.5, condition: str = "",
                 unaltered: bool = False) -> MetricsReport:
    """Score every prediction map against its mask (matched by filename stem).

    In unaltered mode no masks exist: every positive pixel is false and
    rows carry only the false-positive rate. Pairs with mismatched
    dimensions are flagged and excluded from the means; files without a
    partner are reported and skipped.
    """
    preds = _stems(pred_dir)
    report = MetricsReport(condition=condition, tau=tau,
                           mode=UNALTERED if unaltered else TAMPERED)

    if unaltered:
        if not preds:
            raise NoPairs(f"no prediction maps in {pred_dir}")
        for stem, path in sorted(preds.items()):
            pred = binarize(read_probmap(path), tau)
            report.rows.append(ImageRow(stem, condition, fpr=fpr_pix(pred)))
        report.mean_fpr = float(np.mean([r.fpr for r in report.rows]))
        return report

    if gt_dir is None:
        raise ValueError("gt_dir is required unless unaltered=True")
    gts = _stems(gt_dir)
    report.unmatched_pred = sorted(set(preds) - set(gts))
    report.unmatched_gt = sorted(set(gts) - set(preds))
    common = sorted(set(preds) & set(gts))
    if not common:
        raise NoPairs(f"no matching stems between {pred_dir} and {gt_dir}")

    for stem in common:
        pm = read_probmap(preds[stem])
        gt = read_mask(gts[stem])
        if pm.values.shape != gt.shape:
            report.rows.append(ImageRow(stem, condition, flags=FLAG_DIM_MISMATCH))
            continue
        pred = binarize(pm, tau)
        counts = pixel_counts(pred, gt)
        f1, iou = f1_iou(counts)
        flags = FLAG_EMPTY_BOTH if (counts.tp == counts.fp == counts.fn == 0) else ""
        report.rows.append(ImageRow(
            stem, condition, counts.tp, counts.fp, counts.fn,
            f1, iou, counts.fp / gt.size, flags))

    scored = report.scored_rows()
    if not scored:
        raise NoPairs("every pair was excluded (dimension mismatches)")
    report.mean_f1 = float(np.mean([r.f1 for r in scored]))
    report.mean_iou = float(np.mean([r.iou for r in scored]))
    report.mean_fpr = float(np.mean([r.fpr for r in scored]))
    return report


def write_report_csv(report: MetricsReport, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
