"""Quantization-table banks: build from a corpus, persist as JSONL, analyze
frequency structure, and sample tables for recompression.

A bank holds one luminance table per scanned file, deduplicated by
fingerprint with occurrence counts. Construction is a commutative fold over
per-file records, so scan order and parallelism never change the result.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from jpegqt.errors import (
    EmptyBank,
    FingerprintMismatch,
    MalformedLine,
    ToolkitError,
    UnreadableRoot,
)
from jpegqt.parse import JPEG_MAGIC, luminance_table
from jpegqt.qtables import QuantTable, fingerprint, zigzag_to_natural
from jpegqt.rng import SplitMix64

MAX_SOURCES = 3


@dataclass(frozen=True)
class BankEntry:
    fingerprint: str
    table: QuantTable
    count: int
    sources: tuple = ()


@dataclass
class QtBank:
    entries: list = field(default_factory=list)  # sorted by fingerprint
    scanned: int = 0
    failed: int = 0

    @property
    def distinct_count(self) -> int:
        return len(self.entries)

    def by_fingerprint(self, fp: str):
        for e in self.entries:
            if e.fingerprint == fp:
                return e
        return None

    def fingerprints(self):
        return {e.fingerprint for e in self.entries}


@dataclass(frozen=True)
class FileRecord:
    """Outcome of scanning one file: a table, a failure, or a skip."""

    relpath: str
    table: QuantTable | None = None
    failed: bool = False


def scan_file(path, relpath: str) -> FileRecord | None:
    """Scan one file; None means not a JPEG (skipped by magic check)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError:
        return FileRecord(relpath, failed=True)
    if not data.startswith(JPEG_MAGIC):
        return None
    try:
        return FileRecord(relpath, table=luminance_table(data))
    except ToolkitError:
        return FileRecord(relpath, failed=True)


def merge_records(records) -> QtBank:
    """Fold per-file records into a bank; associative and commutative."""
    acc = {}
    scanned = 0
    failed = 0
    for rec in records:
        if rec is None:
            continue
        scanned += 1
        if rec.failed or rec.table is None:
            failed += 1
            continue
        fp = fingerprint(rec.table)
        if fp not in acc:
            acc[fp] = [rec.table, 0, []]
        acc[fp][1] += 1
        sources = acc[fp][2]
        sources.append(rec.relpath)
        sources.sort()
        del sources[MAX_SOURCES:]
    entries = [
        BankEntry(fp, table, count, tuple(sources))
        for fp, (table, count, sources) in sorted(acc.items())
    ]
    return QtBank(entries, scanned, failed)


def list_corpus_files(root, recursive: bool = True):
    """Relative paths under root, sorted, with forward-slash separators."""
    if not os.path.isdir(root):
        raise UnreadableRoot(f"not a readable directory: {root}")
    rels = []
    if recursive:
        for dirpath, dirnames, filenames in os.walk(root):
            dirnames.sort()
            for name in filenames:
                full = os.path.join(dirpath, name)
                rels.append(os.path.relpath(full, root).replace(os.sep, "/"))
    else:
        for name in os.listdir(root):
            if os.path.isfile(os.path.join(root, name)):
                rels.append(name)
    return sorted(rels)


def build_bank(corpus_root, recursive: bool = True, threads: int = 1) -> QtBank:
    """Scan a corpus directory and bank the luminance table of every JPEG."""
    rels = list_corpus_files(corpus_root, recursive)
    paths = [os.path.join(corpus_root, rel.replace("/", os.sep)) for rel in rels]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(scan_file, paths, rels))
    else:
        records = [scan_file(p, r) for p, r in zip(paths, rels)]
    return merge_records(records)


def save_bank(bank: QtBank, path) -> None:
    """Canonical JSONL: header line, then entries sorted by fingerprint."""
    lines = [json.dumps({"format": "qtbank", "version": 1,
                         "scanned": bank.scanned, "failed": bank.failed})]
    for e in sorted(bank.entries, key=lambda e: e.fingerprint):
        lines.append(json.dumps({
            "fp": e.fingerprint,
            "precision": e.table.precision,
            "order": "natural",
            "values": list(e.table.values),
            "count": e.count,
            "sources": list(e.sources),
        }))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_bank(path, declared_order: str = "natural") -> QtBank:
    """Load and re-verify a bank file; fingerprints are recomputed, not trusted.

    ``declared_order`` applies to entries that carry no ``order`` field:
    zigzag-stored values are converted to natural order before anything else.
    """
    if declared_order not in ("natural", "zigzag"):
        raise ValueError(f"declared_order must be natural or zigzag, got {declared_order!r}")
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MalformedLine(1, "empty bank file")

    def parse_line(lineno, line):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedLine(lineno, f"invalid JSON: {e}") from None
        if not isinstance(obj, dict):
            raise MalformedLine(lineno, "expected a JSON object")
        return obj

    header = parse_line(1, lines[0])
    if header.get("format") != "qtbank":
        raise MalformedLine(1, "missing qtbank header")
    scanned = int(header.get("scanned", 0))
    failed = int(header.get("failed", 0))

    entries = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        obj = parse_line(lineno, line)
        values = obj.get("values")
        if not isinstance(values, list) or len(values) != 64 or not all(
            isinstance(v, int) for v in values
        ):
            raise MalformedLine(lineno, "values must be a list of 64 integers")
        order = obj.get("order", declared_order)
        if order == "zigzag":
            values = list(zigzag_to_natural(values))
        elif order != "natural":
            raise MalformedLine(lineno, f"unknown order {order!r}")
        precision = obj.get("precision", 8)
        table = QuantTable(tuple(values), precision=precision)
        fp = fingerprint(table)
        stored_fp = obj.get("fp")
        if stored_fp is not None and stored_fp != fp:
            raise FingerprintMismatch(f"line {lineno}: stored {stored_fp} != computed {fp}")
        if fp in seen:
            raise MalformedLine(lineno, f"duplicate fingerprint {fp}")
        seen.add(fp)
        count = obj.get("count", 1)
        if not isinstance(count, int) or count < 1:
            raise MalformedLine(lineno, f"count must be a positive integer, got {count!r}")
        sources = tuple(obj.get("sources", ()))[:MAX_SOURCES]
        entries.append(BankEntry(fp, table, count, sources))

    bank = QtBank(sorted(entries, key=lambda e: e.fingerprint), scanned, failed)
    if sum(e.count for e in bank.entries) > bank.scanned:
        raise MalformedLine(1, "sum of counts exceeds the scanned total")
    return bank


@dataclass(frozen=True)
class ParetoEntry:
    rank: int
    fingerprint: str
    count: int
    share: float


@dataclass
class ParetoReport:
    entries: list
    distinct_count: int
    total: int
    head_coverage: dict  # top-k -> cumulative share

    HEAD_KS = (1, 6, 25)


def pareto(bank: QtBank) -> ParetoReport:
    """Frequency ranking: count descending, fingerprint ascending on ties."""
    if not bank.entries:
        raise EmptyBank("cannot rank an empty bank")
    total = sum(e.count for e in bank.entries)
    ranked = sorted(bank.entries, key=lambda e: (-e.count, e.fingerprint))
    entries = [
        ParetoEntry(i + 1, e.fingerprint, e.count, e.count / total)
        for i, e in enumerate(ranked)
    ]
    coverage = {}
    for k in ParetoReport.HEAD_KS:
        coverage[k] = sum(e.share for e in entries[:k])
    return ParetoReport(entries, len(entries), total, coverage)


def sample_table(bank: QtBank, rng: SplitMix64, weighting: str = "uniform") -> QuantTable:
    """Draw one table: uniform over distinct tables, or proportional to counts."""
    if not bank.entries:
        raise EmptyBank("cannot sample from an empty bank")
    if weighting == "uniform":
        idx = rng.randint(0, len(bank.entries) - 1)
    elif weighting == "frequency":
        idx = rng.choice_weighted([e.count for e in bank.entries])
    else:
        raise ValueError(f"weighting must be uniform or frequency, got {weighting!r}")
    return bank.entries[idx].table


def render_pareto_csv(report: ParetoReport) -> str:
    lines = ["rank,fp,count,share"]
    for e in report.entries:
        lines.append(f"{e.rank},{e.fingerprint},{e.count},{e.share:.6f}")
    return "\n".join(lines) + "\n"


def render_pareto_text(report: ParetoReport, width: int = 40, top: int = 25) -> str:
    lines = [f"distinct tables: {report.distinct_count}   files counted: {report.total}"]
    peak = report.entries[0].share or 1.0
    for e in report.entries[:top]:
        bar = "#" * max(1, round(width * e.share / peak))
        lines.append(f"{e.rank:>4}  {e.fingerprint[:12]}  {e.count:>7}  {e.share:>7.3%}  {bar}")
    if report.distinct_count > top:
        rest = sum(e.share for e in report.entries[top:])
        lines.append(f"      ... {report.distinct_count - top} more tables covering {rest:.3%}")
    shares_sum = sum(e.share for e in report.entries)
    lines.append(f"head coverage: top-1 {report.head_coverage[1]:.3f}, "
                 f"top-6 {report.head_coverage[6]:.3f}, top-25 {report.head_coverage[25]:.3f}")
    lines.append(f"shares sum to {shares_sum:.3f}")
    return "\n".join(lines) + "\n"
