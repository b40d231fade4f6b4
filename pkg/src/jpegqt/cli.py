"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error. Seed and thread count
can come from JPEGQT_SEED / JPEGQT_THREADS; explicit flags win. Every
randomized command echoes the effective seed so runs can be replayed.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

from jpegqt import __version__
from jpegqt.errors import ToolkitError
from jpegqt.recompress import DEFAULT_SEED

SEED_ENV = "JPEGQT_SEED"
THREADS_ENV = "JPEGQT_THREADS"


class _Parser(argparse.ArgumentParser):
    """argparse with the usage-error exit code pinned to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else DEFAULT_SEED


def _env_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw:
        return max(1, int(raw))
    return min(8, os.cpu_count() or 1)


def build_parser() -> _Parser:
    parser = _Parser(prog="jpegqt", description=__doc__)
    parser.add_argument("--version", action="version", version=f"jpegqt {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    qt = sub.add_parser("qt", help="inspect and generate quantization tables")
    qt_sub = qt.add_subparsers(dest="qt_command", required=True, parser_class=_Parser)
    qt_show = qt_sub.add_parser("show", help="print the reference base tables")
    qt_show.set_defaults(func=cmd_qt_show)
    qt_gen = qt_sub.add_parser("gen", help="print the standard table for a quality factor")
    qt_gen.add_argument("--quality", type=int, required=True)
    qt_gen.add_argument("--role", choices=["luminance", "chrominance"], default="luminance")
    qt_gen.set_defaults(func=cmd_qt_gen)
    qt_est = qt_sub.add_parser("estimate", help="nearest standard quality of a file's tables")
    qt_est.add_argument("file")
    qt_est.set_defaults(func=cmd_qt_estimate)
    qt_fp = qt_sub.add_parser("fingerprint", help="fingerprints of a file's tables")
    qt_fp.add_argument("file")
    qt_fp.set_defaults(func=cmd_qt_fingerprint)

    bank = sub.add_parser("bank", help="build and analyze quantization-table banks")
    bank_sub = bank.add_subparsers(dest="bank_command", required=True, parser_class=_Parser)
    b_build = bank_sub.add_parser("build", help="scan a corpus into a bank file")
    b_build.add_argument("--in", dest="input", required=True, metavar="DIR")
    b_build.add_argument("--out", required=True, metavar="FILE")
    b_build.add_argument("--no-recursive", action="store_true")
    b_build.add_argument("--threads", type=int, default=None)
    b_build.set_defaults(func=cmd_bank_build)
    b_stats = bank_sub.add_parser("stats", help="summary numbers of a bank file")
    b_stats.add_argument("--bank", required=True, metavar="FILE")
    b_stats.set_defaults(func=cmd_bank_stats)
    b_pareto = bank_sub.add_parser("pareto", help="frequency ranking of a bank")
    b_pareto.add_argument("--bank", required=True, metavar="FILE")
    b_pareto.add_argument("--out", metavar="CSV", help="write the ranking as CSV")
    b_pareto.add_argument("--format", choices=["text", "csv"], default="text")
    b_pareto.set_defaults(func=cmd_bank_pareto)

    rc = sub.add_parser("recompress", help="materialize one evaluation condition")
    rc.add_argument("--in", dest="input", required=True, metavar="DIR")
    rc.add_argument("--out", required=True, metavar="DIR")
    rc.add_argument("--condition", choices=["orig", "std", "real"], required=True)
    rc.add_argument("--seed", type=int, default=None)
    rc.add_argument("--qf-range", default="30:100", metavar="LO:HI")
    rc.add_argument("--bank", metavar="FILE")
    rc.add_argument("--weighting", choices=["uniform", "frequency"], default="uniform")
    rc.add_argument("--subsampling", choices=["420", "444"], default="420")
    rc.add_argument("--threads", type=int, default=None)
    rc.add_argument("--manifest", metavar="FILE", help="default: <out>/manifest.csv")
    rc.set_defaults(func=cmd_recompress)

    ela = sub.add_parser("ela", help="error-level-analysis maps")
    ela.add_argument("--in", dest="input", required=True, metavar="FILE|DIR")
    ela.add_argument("--out", required=True, metavar="DIR")
    ela.add_argument("--quality", type=int, default=75)
    ela.set_defaults(func=cmd_ela)

    dq = sub.add_parser("dq", help="double-quantization localization maps")
    dq.add_argument("--in", dest="input", required=True, metavar="FILE|DIR")
    dq.add_argument("--out", required=True, metavar="DIR")
    dq.add_argument("--csv", action="store_true", help="also dump block-score grids as CSV")
    dq.set_defaults(func=cmd_dq)

    ev = sub.add_parser("eval", help="score probability maps against masks")
    ev.add_argument("--pred", required=True, metavar="DIR")
    group = ev.add_mutually_exclusive_group(required=True)
    group.add_argument("--gt", metavar="DIR")
    group.add_argument("--unaltered", action="store_true")
    ev.add_argument("--tau", type=float, default=0.5)
    ev.add_argument("--condition", required=True)
    ev.add_argument("--out", required=True, metavar="FILE")
    ev.set_defaults(func=cmd_eval)

    rep = sub.add_parser("report", help="factorial result tables from metric CSVs")
    rep.add_argument("--runs", required=True, metavar="FILE",
                     help="CSV: model,training,dataset,condition,metrics_csv")
    rep.add_argument("--metric", choices=["f1", "iou", "fpr"], default="f1")
    rep.add_argument("--out", required=True, metavar="FILE")
    rep.add_argument("--format", choices=["csv", "text"], default="csv")
    rep.set_defaults(func=cmd_report)

    fx = sub.add_parser("fixtures", help=argparse.SUPPRESS)
    fx_sub = fx.add_subparsers(dest="fixtures_command", required=True, parser_class=_Parser)
    fx_gen = fx_sub.add_parser("gen", help="generate the synthetic test corpus")
    fx_gen.add_argument("--out", required=True, metavar="DIR")
    fx_gen.add_argument("--seed", type=int, default=None)
    fx_gen.add_argument("--corpus-files", type=int, default=40)
    fx_gen.add_argument("--dq-fixtures", type=int, default=6)
    fx_gen.set_defaults(func=cmd_fixtures_gen)

    return parser


# --- qt ---

def cmd_qt_show(args) -> int:
    from jpegqt.qtables import BASE_CHROMINANCE, BASE_LUMINANCE, QuantTable

    print("luminance base table:")
    print(QuantTable(BASE_LUMINANCE).render())
    print()
    print("chrominance base table:")
    print(QuantTable(BASE_CHROMINANCE).render())
    return 0


def cmd_qt_gen(args) -> int:
    from jpegqt.qtables import fingerprint, standard_table

    table = standard_table(args.quality, args.role)
    print(f"standard {args.role} table, quality {args.quality}:")
    print(table.render())
    print(f"max entry: {table.max_entry()}")
    print(f"fingerprint: {fingerprint(table)}")
    return 0


def _read_file(path) -> bytes:
    with open(path, "rb") as fh:
        return fh.read()


def cmd_qt_estimate(args) -> int:
    from jpegqt.parse import extract_dqt
    from jpegqt.qtables import estimate_quality, fingerprint

    records = extract_dqt(_read_file(args.file))
    if not records:
        raise ToolkitError(f"no quantization tables in {args.file}")
    for rec in records:
        role = rec.table.role
        q, distance, exact = estimate_quality(rec.table, role if role != "unspecified" else "luminance")
        label = f"exact q={q}" if exact else f"approx q={q} (mean abs diff {float(distance):.4f})"
        print(f"table id {rec.table_id} ({role}, {rec.precision}-bit): {label}")
        print(f"fingerprint: {fingerprint(rec.table)}")
        print(rec.table.render())
    return 0


def cmd_qt_fingerprint(args) -> int:
    from jpegqt.parse import extract_dqt
    from jpegqt.qtables import fingerprint

    records = extract_dqt(_read_file(args.file))
    if not records:
        raise ToolkitError(f"no quantization tables in {args.file}")
    for rec in records:
        print(f"table id {rec.table_id} ({rec.table.role}): {fingerprint(rec.table)}")
    return 0


# --- bank ---

def cmd_bank_build(args) -> int:
    from jpegqt.bank import build_bank, save_bank

    threads = args.threads if args.threads else _env_threads()
    bank = build_bank(args.input, recursive=not args.no_recursive, threads=threads)
    save_bank(bank, args.out)
    print(f"scanned {bank.scanned} JPEG files ({bank.failed} failed), "
          f"{bank.distinct_count} distinct luminance tables -> {args.out}")
    return 0


def cmd_bank_stats(args) -> int:
    from jpegqt.bank import load_bank, pareto

    bank = load_bank(args.bank)
    print(f"distinct tables: {bank.distinct_count}")
    print(f"files scanned: {bank.scanned}")
    print(f"files failed: {bank.failed}")
    if bank.entries:
        top = pareto(bank).entries[0]
        print(f"most frequent: {top.fingerprint} ({top.count} files, {top.share:.3f} share)")
    return 0


def cmd_bank_pareto(args) -> int:
    from jpegqt.bank import load_bank, pareto, render_pareto_csv, render_pareto_text

    report = pareto(load_bank(args.bank))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(render_pareto_csv(report))
    if args.format == "csv":
        print(render_pareto_csv(report), end="")
    else:
        print(render_pareto_text(report), end="")
    return 0


# --- recompress / forensics / eval ---

def cmd_recompress(args) -> int:
    from jpegqt.bank import load_bank
    from jpegqt.recompress import PipelineSpec, materialize_condition, write_manifest

    try:
        lo, hi = (int(p) for p in args.qf_range.split(":"))
    except ValueError:
        raise ToolkitError(f"bad --qf-range {args.qf_range!r}, expected LO:HI") from None
    seed = args.seed if args.seed is not None else _env_seed()
    threads = args.threads if args.threads else _env_threads()
    bank = None
    if args.condition == "real":
        if not args.bank:
            raise ToolkitError("--condition real requires --bank")
        bank = load_bank(args.bank)
    spec = PipelineSpec(kind=args.condition, master_seed=seed, qf_low=lo, qf_high=hi,
                        bank_path=args.bank, weighting=args.weighting,
                        subsampling=args.subsampling)
    manifest = materialize_condition(args.input, args.out, spec, bank=bank, threads=threads)
    manifest_path = args.manifest or os.path.join(args.out, "manifest.csv")
    write_manifest(manifest, manifest_path)
    errors = sum(1 for r in manifest.rows if r.error)
    print(f"seed: {seed}")
    print(f"{len(manifest.rows) - errors} files processed, {errors} errors -> {args.out}")
    return 0


def _input_files(path):
    if os.path.isdir(path):
        return [os.path.join(path, n) for n in sorted(os.listdir(path))
                if n.lower().endswith((".jpg", ".jpeg"))]
    return [path]


def cmd_ela(args) -> int:
    from jpegqt.forensics import ela_map
    from jpegqt.probmap import write_probmap

    os.makedirs(args.out, exist_ok=True)
    for src in _input_files(args.input):
        pm = ela_map(_read_file(src), args.quality)
        stem = os.path.splitext(os.path.basename(src))[0]
        write_probmap(os.path.join(args.out, stem + ".pgm"), pm)
    print(f"resave quality: {args.quality}")
    return 0


def cmd_dq(args) -> int:
    import numpy as np

    from jpegqt.codec import decode_to_coefficients
    from jpegqt.forensics import dq_localization_map, dq_scores_from_coefficients
    from jpegqt.probmap import write_probmap

    os.makedirs(args.out, exist_ok=True)
    degenerate = 0
    for src in _input_files(args.input):
        data = _read_file(src)
        stem = os.path.splitext(os.path.basename(src))[0]
        pm = dq_localization_map(data)
        write_probmap(os.path.join(args.out, stem + ".pgm"), pm)
        if args.csv:
            scores = dq_scores_from_coefficients(decode_to_coefficients(data))
            np.savetxt(os.path.join(args.out, stem + "_blocks.csv"),
                       scores.grid, delimiter=",", fmt="%.6f")
            degenerate += scores.degenerate
    if args.csv and degenerate:
        print(f"{degenerate} degenerate inputs (zero maps)")
    return 0


def cmd_eval(args) -> int:
    from jpegqt.metrics import evaluate_set, write_report_csv

    report = evaluate_set(args.pred, gt_dir=args.gt, tau=args.tau,
                          condition=args.condition, unaltered=args.unaltered)
    write_report_csv(report, args.out)
    for name in report.unmatched_pred:
        print(f"unmatched prediction: {name}", file=sys.stderr)
    for name in report.unmatched_gt:
        print(f"unmatched ground truth: {name}", file=sys.stderr)
    if report.mode == "unaltered":
        print(f"{len(report.rows)} images, mean fpr_pix {report.mean_fpr:.3e} -> {args.out}")
    else:
        print(f"{len(report.scored_rows())} images, mean f1 {report.mean_f1:.4f}, "
              f"mean iou {report.mean_iou:.4f} -> {args.out}")
    return 0


def cmd_report(args) -> int:
    from jpegqt.report import RunResult, factorial_report

    base = os.path.dirname(os.path.abspath(args.runs))
    runs = []
    with open(args.runs, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            metrics_path = row["metrics_csv"]
            if not os.path.isabs(metrics_path):
                metrics_path = os.path.join(base, metrics_path)
            value = _mean_from_metrics_csv(metrics_path, args.metric)
            runs.append(RunResult(row["model"], row["training"], row["dataset"],
                                  row["condition"], value))
    table = factorial_report(runs, metric=args.metric)
    rendered = table.to_csv() if args.format == "csv" else table.to_text()
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rendered)
    print(f"{len(runs)} runs -> {args.out}")
    return 0


def _mean_from_metrics_csv(path, metric: str) -> float:
    col = {"f1": "f1", "iou": "iou", "fpr": "fpr_pix"}[metric]
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            if row["image_id"] == "mean":
                cell = row[col]
                if not cell:
                    raise ToolkitError(f"{path} has no {metric} mean")
                return float(cell)
    raise ToolkitError(f"{path} has no mean row")


def cmd_fixtures_gen(args) -> int:
    from jpegqt.fixtures import generate_suite

    seed = args.seed if args.seed is not None else _env_seed()
    summary = generate_suite(args.out, seed, corpus_files=args.corpus_files,
                             dq_fixtures=args.dq_fixtures)
    print(f"seed: {seed}")
    print(f"{len(summary['corpus'])} corpus files, {len(summary['dq'])} dq fixtures, "
          f"{len(summary['ela'])} ela fixtures -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ToolkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
