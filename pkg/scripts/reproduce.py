#!/usr/bin/env python3
"""Desk-scale end-to-end run: synthetic fixtures -> table bank -> the three
recompression conditions -> both forensic baselines -> metrics -> factorial
report tables.

Every output under --out is a pure function of --seed, so repeat runs
produce byte-identical trees.

Usage: python scripts/reproduce.py --out WORKDIR [--seed N]
"""

import argparse
import os
import sys
import time

from jpegqt.cli import main as jpegqt

CONDITIONS = ("orig", "std", "real")
MODELS = ("dq", "ela")


def run(args) -> int:
    rc = jpegqt(args)
    if rc != 0:
        print(f"step failed ({rc}): {' '.join(args)}", file=sys.stderr)
        sys.exit(rc)
    return rc


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", required=True)
    parser.add_argument("--seed", type=int, default=1789)
    opts = parser.parse_args()
    t0 = time.time()

    work = opts.out
    seed = str(opts.seed)
    fixtures = os.path.join(work, "fixtures")
    bank = os.path.join(work, "bank.jsonl")
    os.makedirs(work, exist_ok=True)

    print("== fixtures ==")
    run(["fixtures", "gen", "--out", fixtures, "--seed", seed])

    print("== bank ==")
    run(["bank", "build", "--in", os.path.join(fixtures, "corpus"), "--out", bank])
    run(["bank", "stats", "--bank", bank])
    run(["bank", "pareto", "--bank", bank, "--out", os.path.join(work, "pareto.csv")])

    print("== recompression conditions ==")
    for cond in CONDITIONS:
        cmd = ["recompress", "--in", os.path.join(fixtures, "dq"),
               "--out", os.path.join(work, "cond", cond),
               "--condition", cond, "--seed", seed]
        if cond == "real":
            cmd += ["--bank", bank]
        run(cmd)

    print("== forensic baselines ==")
    for cond in CONDITIONS:
        src = os.path.join(work, "cond", cond)
        run(["dq", "--in", src, "--out", os.path.join(work, "pred", "dq", cond)])
        run(["ela", "--in", src, "--out", os.path.join(work, "pred", "ela", cond)])

    print("== unaltered false-positive leg ==")
    clean = os.path.join(fixtures, "corpus", "batch0")
    run(["dq", "--in", clean, "--out", os.path.join(work, "pred", "dq", "clean")])
    run(["ela", "--in", clean, "--out", os.path.join(work, "pred", "ela", "clean")])

    print("== evaluation ==")
    metrics_dir = os.path.join(work, "metrics")
    os.makedirs(metrics_dir, exist_ok=True)
    runs_rows = ["model,training,dataset,condition,metrics_csv"]
    fpr_rows = ["model,training,dataset,condition,metrics_csv"]
    for model in MODELS:
        for cond in CONDITIONS:
            out_csv = os.path.join(metrics_dir, f"{model}_{cond}.csv")
            run(["eval", "--pred", os.path.join(work, "pred", model, cond),
                 "--gt", os.path.join(fixtures, "masks"),
                 "--tau", "0.5", "--condition", cond, "--out", out_csv])
            runs_rows.append(f"{model},base,synthetic,{cond},metrics/{model}_{cond}.csv")
        clean_csv = os.path.join(metrics_dir, f"{model}_clean.csv")
        run(["eval", "--pred", os.path.join(work, "pred", model, "clean"),
             "--unaltered", "--tau", "0.5", "--condition", "orig", "--out", clean_csv])
        fpr_rows.append(f"{model},base,synthetic-clean,orig,metrics/{model}_clean.csv")

    print("== report ==")
    runs_csv = os.path.join(work, "runs_f1.csv")
    with open(runs_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(runs_rows) + "\n")
    run(["report", "--runs", runs_csv, "--metric", "f1",
         "--out", os.path.join(work, "report_f1.csv")])
    run(["report", "--runs", runs_csv, "--metric", "f1", "--format", "text",
         "--out", os.path.join(work, "report_f1.txt")])
    fpr_csv = os.path.join(work, "runs_fpr.csv")
    with open(fpr_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(fpr_rows) + "\n")
    run(["report", "--runs", fpr_csv, "--metric", "fpr",
         "--out", os.path.join(work, "report_fpr.csv")])

    print(f"done in {time.time() - t0:.1f}s -> {work}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
