"""WER on the minimal-pair suite under each normalization condition.

Reads the minimal-pair fixture (or any manifest/hypothesis pair) and prints
one row per preset, so the effect of vowel-length and gemination collapsing
can be read off directly.

    python scripts/length_normalization_ablation.py [--manifest M --hyp H] [--out table.csv]
"""

import argparse
import csv
import sys
from pathlib import Path

from ethio_eval import harness
from ethio_eval.normalize import NormalizationConfig

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
CONDITIONS = ("none", "eval", "vowel", "geminate", "both")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--manifest", type=Path, default=FIXTURES / "minimal_pairs_manifest.jsonl")
    ap.add_argument("--hyp", type=Path, default=FIXTURES / "minimal_pairs_hyp.jsonl")
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    manifest = harness.load_manifest(args.manifest)
    hyps = harness.load_hypotheses(args.hyp)
    rows = []
    for name in CONDITIONS:
        report = harness.evaluate_run(manifest, hyps, NormalizationConfig.preset(name), harness.EvalOptions(gender=False))
        row = {"condition": name, "ALL": f"{report.aggregate.wer:.2f}"}
        row.update({r.language: f"{r.wer:.2f}" for r in report.rows})
        rows.append(row)

    fields = list(rows[0])
    out = open(args.out, "w", encoding="utf-8", newline="") if args.out else sys.stdout
    w = csv.DictWriter(out, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if args.out:
        out.close()


if __name__ == "__main__":
    main()
