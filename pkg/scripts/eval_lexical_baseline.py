#!/usr/bin/env python3
"""Score the builtin lexical verifier on the bundled overlap corpus and
contrast it with an always-verifiable baseline on a skewed synthetic set."""

import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(REPO / "src"))

from presup.cli import main as cli_main
from presup.metrics import evaluate, evaluate_labels, report_to_json

OVERLAP = REPO / "data" / "overlap"


def run():
    with tempfile.TemporaryDirectory() as tmp:
        pred = Path(tmp) / "pred.jsonl"
        rc = cli_main([
            "verify",
            "--presuppositions", str(OVERLAP / "presuppositions.jsonl"),
            "--questions", str(OVERLAP / "questions.jsonl"),
            "--documents", str(OVERLAP / "documents.jsonl"),
            "--out", str(pred),
        ])
        if rc != 0:
            return rc
        report = evaluate(pred, OVERLAP / "gold.jsonl")
    print("lexical verifier on overlap corpus:")
    print(report_to_json(report))

    skewed = evaluate_labels([True] * 78 + [False] * 22, [True] * 100)
    print("\nalways-verifiable baseline on a 78/22 split:")
    print(report_to_json(skewed))
    return 0


if __name__ == "__main__":
    sys.exit(run())
