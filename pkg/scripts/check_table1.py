"""Compare a built dataset's statistics against the published pair counts.

Usage: python scripts/check_table1.py <corpus.jsonl | corpus-dir> [--n 3]

Builds the three-level dataset from the given source annotations
(honoring preassigned partitions when present) and diffs the resulting
counts against the published reference totals. Any deviation is printed
level by level, together with a per-question count table written next
to the working directory, so segmenter-induced sentence-count drift is
visible rather than hidden.
"""

import argparse
import json
import sys
from pathlib import Path

from answerability import interchange
from answerability.dataset import build_dataset

REFERENCE = {
    "sentence_pairs": {"answerable": 6395, "unanswerable": 19043},
    "passage_pairs": {"answerable": 1778, "unanswerable": 1932},
    "test_ranking_pairs": {"answerable": 4035, "unanswerable": 504},
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("corpus", help="interchange corpus file or directory")
    parser.add_argument("--n", type=int, default=3)
    parser.add_argument("--per-question-out", default="per_question_counts.json")
    args = parser.parse_args()

    built = build_dataset(interchange.load_corpus(args.corpus), n=args.n)
    stats = built.stats
    actual = {
        "sentence_pairs": stats["sentence_pairs"]["total"],
        "passage_pairs": stats["passage_pairs"]["total"],
        "test_ranking_pairs": stats["ranking_pairs"]["test"],
    }

    deviations = 0
    for level, expected in REFERENCE.items():
        got = actual[level]
        status = "OK " if got == expected else "DIFF"
        if got != expected:
            deviations += 1
        print(f"{status} {level}: expected {expected}, got {got}")

    out = Path(args.per_question_out)
    out.write_text(json.dumps(stats["per_question"], indent=2), encoding="utf-8")
    print(f"per-question counts written to {out}")
    if deviations:
        print(f"{deviations} level(s) deviate from the reference; "
              "inspect the per-question table to locate them")
    return 1 if deviations else 0


if __name__ == "__main__":
    sys.exit(main())
