"""Confusion matrix, per-class precision/recall/F1, and the printed report.

Matrix convention: rows are actual classes, columns are predicted classes.
Metrics with a zero denominator are defined as 0 rather than NaN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .corpus import UrlClass


@dataclass
class ConfusionMatrix:
    m: np.ndarray  # (4, 4) int64, m[actual][predicted]

    @property
    def total(self) -> int:
        return int(self.m.sum())


@dataclass
class ClassMetrics:
    precision: float
    recall: float
    f1: float


@dataclass
class EvalReport:
    confusion: ConfusionMatrix
    per_class: dict[UrlClass, ClassMetrics]
    accuracy: float


def confusion(pairs: list[tuple[UrlClass, UrlClass]]) -> ConfusionMatrix:
    if not pairs:
        raise ValueError("no (actual, predicted) pairs to count")
    m = np.zeros((len(UrlClass), len(UrlClass)), dtype=np.int64)
    for actual, predicted in pairs:
        m[int(actual), int(predicted)] += 1
    return ConfusionMatrix(m)


def metrics(cm: ConfusionMatrix) -> EvalReport:
    m = cm.m
    total = cm.total
    if total <= 0:
        raise ValueError("empty confusion matrix")
    per_class = {}
    for cls in UrlClass:
        k = int(cls)
        tp = int(m[k, k])
        col = int(m[:, k].sum())
        row = int(m[k, :].sum())
        precision = tp / col if col else 0.0
        recall = tp / row if row else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassMetrics(precision=precision, recall=recall, f1=f1)
    accuracy = int(np.trace(m)) / total
    return EvalReport(confusion=cm, per_class=per_class, accuracy=accuracy)


def render_report(report: EvalReport) -> str:
    """Fixed-width classification report; byte-stable for identical input."""
    lines = [f"{'Class':<12}{'Precision':>10}{'Recall':>10}{'F1-Score':>10}"]
    for cls in UrlClass:
        pc = report.per_class[cls]
        lines.append(
            f"{cls.label:<12}{pc.precision:>10.2f}{pc.recall:>10.2f}{pc.f1:>10.2f}"
        )
    lines.append(f"{'Accuracy':<12}{'':>10}{'':>10}{report.accuracy:>10.2f}")
    return "\n".join(lines) + "\n"


def report_as_dict(report: EvalReport) -> dict:
    """Machine-readable form of the report (same fields as the text table)."""
    return {
        "accuracy": report.accuracy,
        "per_class": {
            cls.label: {
                "precision": pc.precision,
                "recall": pc.recall,
                "f1": pc.f1,
            }
            for cls, pc in report.per_class.items()
        },
        "confusion": report.confusion.m.tolist(),
        "total": report.confusion.total,
    }


def render_report_json(report: EvalReport) -> str:
    return json.dumps(report_as_dict(report), indent=2) + "\n"
