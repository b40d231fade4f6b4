"""Exception types shared across the toolkit."""


class ToolkitError(Exception):
    """Base class for all errors raised by this package."""


# --- JPEG parsing ---

class MissingSoi(ToolkitError):
    """Byte stream does not start with an SOI marker."""


class TruncatedSegment(ToolkitError):
    """A segment's declared length runs past the end of the buffer."""


class InvalidPrecision(ToolkitError):
    """DQT precision nibble is neither 0 (8-bit) nor 1 (16-bit)."""


class InvalidTableId(ToolkitError):
    """DQT destination id outside 0..3."""


class NoFrameHeader(ToolkitError):
    """No SOF segment present."""


class UnsupportedFrameType(ToolkitError):
    """SOF marker for a frame type this toolkit does not parse (lossless, differential)."""


# --- codec ---

class UnsupportedCoding(ToolkitError):
    """Stream is not baseline sequential Huffman (progressive, arithmetic, 12-bit...)."""


class CorruptStream(ToolkitError):
    """Entropy-coded data cannot be decoded (bad Huffman code, restart misalignment, EOF)."""


class ImageTooLarge(ToolkitError):
    """Image dimension exceeds the 65535 limit of the frame header."""


# --- bank ---

class UnreadableRoot(ToolkitError):
    """Corpus root directory cannot be read."""


class MalformedLine(ToolkitError):
    """Bank file line failed to parse; carries the 1-based line number."""

    def __init__(self, lineno, message):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class FingerprintMismatch(ToolkitError):
    """Stored fingerprint disagrees with the digest recomputed from the values."""


class EntryOutOfRange(ToolkitError):
    """Quantization step outside the valid range for its precision."""


class EmptyBank(ToolkitError):
    """Operation requires a bank with at least one entry."""


# --- evaluation ---

class DimensionMismatch(ToolkitError):
    """Prediction and ground-truth shapes differ."""


class NoPairs(ToolkitError):
    """No usable prediction/ground-truth pairs were found."""


class ConflictingDuplicateRuns(ToolkitError):
    """Two runs share (model, training, dataset, condition) but disagree on values."""
