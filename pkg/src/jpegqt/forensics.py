"""Classical, model-free localization baselines.

Two detectors, both emitting probability maps:

* Error level analysis: decode, re-save at a fixed quality, and map the
  per-pixel luminance residual. Regions with a compression history unlike
  the rest of the image respond differently to the re-save.

* Double-quantization analysis: when a JPEG was quantized twice with
  different steps, the dequantized coefficients of the twice-compressed
  regions cluster on the lattice of the primary (first) step. The detector
  measures the Fourier periodicity of each frequency's global histogram,
  pools that evidence across frequencies into one primary-table hypothesis
  (standard family), then scores each block by how far its coefficients
  sit off the estimated lattice. Freshly inserted content, compressed only
  once, lands anywhere on the current-step lattice and scores high.

The periodicity statistic and the thresholds here are this module's own
fixed baseline choices, isolated behind dq_block_scores so alternatives can
be swapped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from jpegqt.codec import CoeffImage, EncodeParams, decode, decode_to_coefficients, encode, luminance_plane
from jpegqt.probmap import ProbMap
from jpegqt.qtables import CHROMINANCE, LUMINANCE, standard_table, zigzag_order

# Low-frequency AC coefficients (zigzag positions 1..9): well populated in
# document-like content, where high frequencies are mostly zero.
DEFAULT_FREQUENCIES = tuple(zigzag_order()[1:10])

_MIN_COEFFS = 50              # fewer nonzero coefficients than this: frequency unusable
_MIN_STRENGTH = 0.04          # per-frequency statistic below this: frequency unusable
_MIN_POOLED_STRENGTH = 0.15   # pooled evidence below this: no periodicity found at all
_NEAR_MULTIPLE_DISCOUNT = 0.4
_NORMALIZE_EPS = 1e-6


def ela_map(data: bytes, resave_quality: int = 75) -> ProbMap:
    """Error-level analysis map: residual luminance error of a re-save.

    The residual is normalized by its 99th percentile and clamped to [0,1],
    falling back to the maximum when the percentile is zero.
    """
    img = decode(data)
    params = EncodeParams(
        luminance=standard_table(resave_quality, LUMINANCE),
        chrominance=standard_table(resave_quality, CHROMINANCE),
        subsampling="444",
    )
    resaved = decode(encode(img, params))
    diff = np.abs(
        luminance_plane(img).astype(np.float64) - luminance_plane(resaved).astype(np.float64)
    )
    scale = np.percentile(diff, 99.0)
    if scale <= 0.0:
        scale = diff.max()
    if scale <= 0.0:
        return ProbMap(np.zeros_like(diff))
    return ProbMap(np.clip(diff / scale, 0.0, 1.0))


@dataclass
class FreqHistogram:
    """Per-frequency histograms of dequantized luminance coefficients (bin width 1)."""

    counts: dict  # natural frequency index -> {dequantized value: count}
    n_blocks: int


def coefficient_histograms(data: bytes) -> FreqHistogram:
    ci = decode_to_coefficients(data)
    return histograms_from_coefficients(ci)


def histograms_from_coefficients(ci: CoeffImage) -> FreqHistogram:
    comp = ci.luminance
    steps = np.asarray(comp.table.values, dtype=np.int64)
    blocks = comp.blocks.reshape(-1, 64).astype(np.int64)
    counts = {}
    for f in range(64):
        values, n = np.unique(blocks[:, f] * steps[f], return_counts=True)
        counts[f] = {int(v): int(c) for v, c in zip(values, n)}
    return FreqHistogram(counts, blocks.shape[0])


@dataclass
class DqScores:
    """Per-block tamper scores in [0,1] on the ceil(H/8) x ceil(W/8) grid."""

    grid: np.ndarray
    degenerate: bool
    used_frequencies: list  # of (natural index, estimated primary step, strength)


def _candidate_periods(step: int, spread: float) -> np.ndarray:
    """Primary-step candidates for a frequency whose current step is ``step``:
    periods beyond half the value spread are out, since the histogram would
    not wrap them twice and any smooth envelope looks coherent there.
    """
    upper = min(255, int(spread // 2))
    return np.arange(max(2, step + 1), upper + 1)


def _ambiguity_discount(p: int, step: int) -> float:
    """Down-weight periods that are (near-)multiples of the current step.

    Content quirks in a single-compressed image can mimic excess mass on
    every m-th step multiple, so evidence at those periods is inherently
    less trustworthy; a real primary lattice there still scores, because
    its genuine statistic is far larger than content noise.
    """
    if step < 3:
        return 1.0
    mod = p % step
    near = mod == 0 or (step >= 5 and mod in (1, step - 1))
    return _NEAR_MULTIPLE_DISCOUNT if near else 1.0


def _periodicity_landscape(values: np.ndarray, step: int) -> np.ndarray:
    """Periodicity statistic of one frequency's values at every period 2..255.

    The statistic at a candidate period is the real part of the Fourier
    coefficient of the value histogram minus its moving-average envelope:
    mass sitting ON a lattice is in phase (positive real part), a stray
    dominant +-v pair can only fake coherence in antiphase, and the
    envelope subtraction keeps concentrated small-magnitude mass from
    looking coherent at long periods. Excluded or negative periods score
    zero. Index k of the returned array is the statistic for period k.
    """
    out = np.zeros(256, dtype=np.float64)
    magnitudes = np.abs(values)
    spread = float(np.percentile(magnitudes, 99.0))
    # The core of the mass must wrap the period at least once.
    core = min(spread / 2.0, 1.5 * float(np.median(magnitudes)))
    cand = _candidate_periods(step, 2.0 * core)
    if cand.size == 0:
        return out
    radius = int(min(1023, spread))
    kept = values[magnitudes <= radius]
    hist = np.bincount((kept + radius).astype(np.int64), minlength=2 * radius + 1).astype(np.float64)
    total = hist.sum()
    if total <= 0:
        return out
    v = np.arange(-radius, radius + 1, dtype=np.float64)
    cum = np.concatenate([[0.0], np.cumsum(hist)])
    idx = np.arange(hist.size)
    # Folded |v| histogram for the tooth-coverage factor.
    folded = hist[radius:].copy()
    folded[1:] += hist[radius - 1::-1]
    fcum = np.concatenate([[0.0], np.cumsum(folded)])
    populated_min = max(2.0, 0.01 * total)

    for p in cand:
        half = int(p) // 2
        # The zero-tooth is uninformative: single-compressed mass piles up
        # near zero and would look on-lattice at any period wider than it.
        masked = hist.copy()
        masked[radius - half:radius + half + 1] = 0.0
        masked_total = masked.sum()
        if masked_total < _MIN_COEFFS / 2:
            continue
        # Envelope: moving average over one full period.
        lo = np.clip(idx - half, 0, hist.size)
        hi = np.clip(idx + half + 1, 0, hist.size)
        envelope = (cum[hi] - cum[lo]) / np.maximum(hi - lo, 1)
        resid = masked - envelope
        resid[radius - half:radius + half + 1] = 0.0
        stat = np.dot(resid, np.cos((2.0 * np.pi / p) * v)) / total
        # A real lattice populates several consecutive teeth; an isolated
        # heavy +-v pair cannot.
        tol = max(1.0, p / 4.0, step / 2.0)
        n_teeth = min(4, radius // int(p))
        populated = 0
        for k in range(1, n_teeth + 1):
            a = max(0, int(round(k * p - tol)))
            b = min(radius, int(round(k * p + tol)))
            if fcum[b + 1] - fcum[a] >= populated_min:
                populated += 1
        coverage = populated / n_teeth if n_teeth else 0.0
        out[p] = stat * coverage * _ambiguity_discount(int(p), step)
    np.clip(out, 0.0, None, out=out)
    return out


def _estimate_primary_quality(landscapes: dict, steps) -> tuple:
    """Primary-table hypothesis: the standard quality whose per-frequency
    steps collect the most periodicity evidence, pooled across frequencies.

    Pooling makes the estimate robust where any single frequency's
    histogram is too sparse to pin its own period. The cost is an assumed
    standard-family primary; a stream whose first compression used a
    non-standard table is matched to the nearest standard proxy.
    """
    best_q, best_score = None, 0.0
    for q in range(1, 101):
        ref = standard_table(q, LUMINANCE).values
        score = 0.0
        for f, landscape in landscapes.items():
            p = ref[f]
            if p > steps[f]:
                score += landscape[p]
        if score > best_score:
            best_q, best_score = q, score
    return best_q, best_score


def _box_smooth(grid: np.ndarray, radius: int = 2) -> np.ndarray:
    """Box filter with edge replication; steadies per-block scores before
    normalization."""
    size = 2 * radius + 1
    padded = np.pad(grid, radius, mode="edge")
    out = np.zeros_like(grid)
    for dy in range(size):
        for dx in range(size):
            out += padded[dy:dy + grid.shape[0], dx:dx + grid.shape[1]]
    return out / (size * size)


def dq_scores_from_coefficients(ci: CoeffImage, frequencies=DEFAULT_FREQUENCIES) -> DqScores:
    comp = ci.luminance
    by, bx = comp.blocks.shape[:2]
    steps = comp.table.values

    dequantized = {}
    landscapes = {}
    for f in frequencies:
        deq = comp.blocks[:, :, f].astype(np.int64) * steps[f]
        dequantized[f] = deq
        nz = deq[deq != 0]
        if nz.size < _MIN_COEFFS:
            continue
        landscapes[f] = _periodicity_landscape(nz, steps[f])

    primary_q, pooled = (None, 0.0)
    if landscapes:
        primary_q, pooled = _estimate_primary_quality(landscapes, steps)
    if primary_q is None or pooled < _MIN_POOLED_STRENGTH:
        return DqScores(np.zeros((by, bx)), True, [])

    primary = standard_table(primary_q, LUMINANCE).values
    score_sum = np.zeros((by, bx), dtype=np.float64)
    evidence = np.zeros((by, bx), dtype=np.float64)
    used = []
    for f, landscape in landscapes.items():
        s1 = primary[f]
        strength = landscape[s1] if s1 > steps[f] else 0.0
        if strength < _MIN_STRENGTH:
            continue
        used.append((f, s1, strength))
        deq = dequantized[f]
        nz_mask = deq != 0
        # Normalized distance to the primary lattice: 0 on it, 1 midway.
        # Frequencies with a clearer periodicity estimate weigh more.
        residual = np.abs(deq - s1 * np.round(deq / s1))
        off_lattice = 2.0 * residual / s1
        score_sum += np.where(nz_mask, strength * off_lattice, 0.0)
        evidence += strength * nz_mask

    if not used:
        return DqScores(np.zeros((by, bx)), True, [])

    grid = np.zeros((by, bx), dtype=np.float64)
    has = evidence > 0
    grid[has] = score_sum[has] / evidence[has]
    if has.any() and not has.all():
        grid[~has] = grid[has].mean()

    grid = _box_smooth(grid)
    lo, hi = grid.min(), grid.max()
    if hi - lo < _NORMALIZE_EPS:
        return DqScores(np.zeros((by, bx)), True, used)
    return DqScores((grid - lo) / (hi - lo), False, used)


def dq_block_scores(data: bytes, frequencies=DEFAULT_FREQUENCIES) -> DqScores:
    """Double-quantization block scores for a baseline JPEG byte stream."""
    ci = decode_to_coefficients(data)
    scores = dq_scores_from_coefficients(ci, frequencies)
    # The coefficient grid may be MCU-padded; expose exactly ceil(H/8) x ceil(W/8).
    gy = -(-ci.height // 8)
    gx = -(-ci.width // 8)
    return DqScores(scores.grid[:gy, :gx], scores.degenerate, scores.used_frequencies)


def dq_localization_map(data: bytes, frequencies=DEFAULT_FREQUENCIES) -> ProbMap:
    """Pixel-level delivery of the block scores: nearest-neighbor upsampling."""
    ci = decode_to_coefficients(data)
    scores = dq_scores_from_coefficients(ci, frequencies)
    full = np.kron(scores.grid, np.ones((8, 8)))
    return ProbMap(full[:ci.height, :ci.width])
