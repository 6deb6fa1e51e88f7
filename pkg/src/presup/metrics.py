"""Binary verifiability evaluation: accuracy and macro F1.

Macro F1 is the unweighted mean of the per-class F1 values for the
"verifiable" and "not-verifiable" classes; any 0/0 ratio is defined as 0, so
a class absent from both gold and predictions contributes F1 = 0.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .treebank import InputFormatError, _iter_jsonl


class MissingGold(KeyError):
    pass


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    macro_f1: float
    per_class: dict[str, ClassMetrics]
    n: int
    confusion: tuple[tuple[int, int], tuple[int, int]]  # rows: gold (neg, pos); cols: pred

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "n": self.n,
            "per_class": {name: m.to_json() for name, m in self.per_class.items()},
            "confusion": [list(row) for row in self.confusion],
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def evaluate_labels(gold: Sequence[bool], predicted: Sequence[bool]) -> EvalReport:
    if len(gold) != len(predicted):
        raise ValueError("gold and predicted label sequences must align")
    n = len(gold)
    tp = sum(1 for g, p in zip(gold, predicted) if g and p)
    tn = sum(1 for g, p in zip(gold, predicted) if not g and not p)
    fp = sum(1 for g, p in zip(gold, predicted) if not g and p)
    fn = sum(1 for g, p in zip(gold, predicted) if g and not p)

    def class_metrics(tp_: int, fp_: int, fn_: int) -> ClassMetrics:
        precision = _safe_div(tp_, tp_ + fp_)
        recall = _safe_div(tp_, tp_ + fn_)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        return ClassMetrics(precision, recall, f1)

    positive = class_metrics(tp, fp, fn)
    negative = class_metrics(tn, fn, fp)
    per_class = {"verifiable": positive, "not-verifiable": negative}
    return EvalReport(
        accuracy=_safe_div(tp + tn, n),
        macro_f1=(positive.f1 + negative.f1) / 2,
        per_class=per_class,
        n=n,
        confusion=((tn, fp), (fn, tp)),
    )


def _load_label_file(path: str | Path) -> dict[str, bool]:
    labels: dict[str, bool] = {}
    for lineno, record in _iter_jsonl(path):
        record_id = record.get("id", record.get("presup_id"))
        label = record.get("verifiable", record.get("label"))
        if record_id is None or not isinstance(label, bool):
            raise InputFormatError(
                str(path), lineno, "expected {id|presup_id, verifiable|label(bool)}"
            )
        labels[str(record_id)] = label
    return labels


def evaluate(predictions_path: str | Path, gold_path: str | Path) -> EvalReport:
    """Score prediction records against gold records, matched by id. Every
    prediction id must exist in the gold set."""
    predictions = _load_label_file(predictions_path)
    gold = _load_label_file(gold_path)
    missing = sorted(set(predictions) - set(gold))
    if missing:
        raise MissingGold(f"no gold labels for ids: {', '.join(missing)}")
    ids = sorted(predictions)
    return evaluate_labels([gold[i] for i in ids], [predictions[i] for i in ids])


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report.to_json(), indent=2, sort_keys=True)
