"""JPEG quantization-table forensics toolkit.

Parses quantization tables out of JPEG headers, builds deduplicated table
banks from corpora, recompresses image sets under standard-quality or
bank-sampled tables, runs classical compression-forensics baselines (error
level analysis, double-quantization histogram analysis), and scores
pixel-level localization maps with F1 / IoU / FPR metrics.
"""

__version__ = "0.1.0"

from jpegqt.qtables import (
    QuantTable,
    fingerprint,
    estimate_quality,
    is_standard,
    standard_table,
    zigzag_order,
    natural_order,
)

__all__ = [
    "QuantTable",
    "fingerprint",
    "estimate_quality",
    "is_standard",
    "standard_table",
    "zigzag_order",
    "natural_order",
    "__version__",
]
