"""Two-class confusion matrix, precision/recall and macro-averaged F1."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .errors import InvalidInput

CLASS_NAMES = ("Female", "Male")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix2:
    """Rows are true classes, columns predicted classes (Female, Male)."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts)
        if c.shape != (2, 2) or np.any(c < 0) or np.any(c != np.round(c)):
            raise InvalidInput(f"confusion matrix must be 2x2 non-negative integers, got {self.counts!r}")
        object.__setattr__(self, "counts", c.astype(np.int64))

    @classmethod
    def from_flat(cls, values: Iterable[int]) -> "ConfusionMatrix2":
        v = list(values)
        if len(v) != 4:
            raise InvalidInput(f"need 4 counts (row-major), got {len(v)}")
        return cls(np.array(v).reshape(2, 2))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __eq__(self, other):
        return isinstance(other, ConfusionMatrix2) and np.array_equal(self.counts, other.counts)


class PrecisionRecall(NamedTuple):
    precision: float
    recall: float
    degenerate: bool = False


def confusion_matrix(pairs: Iterable[tuple[int, int]]) -> ConfusionMatrix2:
    counts = np.zeros((2, 2), dtype=np.int64)
    n = 0
    for true, pred in pairs:
        counts[int(true), int(pred)] += 1
        n += 1
    if n == 0:
        raise InvalidInput("confusion_matrix needs at least one (true, predicted) pair")
    return ConfusionMatrix2(counts)


def precision_recall(m: ConfusionMatrix2, cls: int) -> PrecisionRecall:
    """Zero denominators give 0.0 and set the degenerate flag instead of raising."""
    c = m.counts
    tp = c[cls, cls]
    col, row = c[:, cls].sum(), c[cls, :].sum()
    precision = tp / col if col else 0.0
    recall = tp / row if row else 0.0
    return PrecisionRecall(float(precision), float(recall), bool(col == 0 or row == 0))


def f1_score(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def macro_f1(m: ConfusionMatrix2) -> float:
    return float(np.mean([f1_score(*precision_recall(m, k)[:2]) for k in range(2)]))


@dataclass
class EvalReport:
    matrix: ConfusionMatrix2
    precision: tuple[float, float]
    recall: tuple[float, float]
    f1: tuple[float, float]
    macro_f1: float
    degenerate: bool

    def to_dict(self) -> dict:
        r6 = lambda v: round(float(v), 6)  # noqa: E731
        return {
            "classes": list(CLASS_NAMES),
            "confusion_matrix": self.matrix.counts.tolist(),
            "precision": [r6(v) for v in self.precision],
            "recall": [r6(v) for v in self.recall],
            "f1": [r6(v) for v in self.f1],
            "macro_f1": r6(self.macro_f1),
            "degenerate": self.degenerate,
            "n": self.matrix.total,
        }


def evaluate(m: ConfusionMatrix2) -> EvalReport:
    prs = [precision_recall(m, k) for k in range(2)]
    f1s = tuple(f1_score(p.precision, p.recall) for p in prs)
    return EvalReport(
        matrix=m,
        precision=tuple(p.precision for p in prs),
        recall=tuple(p.recall for p in prs),
        f1=f1s,
        macro_f1=float(np.mean(f1s)),
        degenerate=any(p.degenerate for p in prs),
    )


def format_report(report: EvalReport) -> str:
    c = report.matrix.counts
    lines = [
        f"{'':>8} {'Female':>7} {'Male':>7}",
        f"{'Female':>8} {c[0, 0]:>7d} {c[0, 1]:>7d}",
        f"{'Male':>8} {c[1, 0]:>7d} {c[1, 1]:>7d}",
    ]
    for k, name in enumerate(CLASS_NAMES):
        lines.append(f"{name:>8}: precision {report.precision[k]:.4f}  recall {report.recall[k]:.4f}"
                     f"  f1 {report.f1[k]:.4f}")
    lines.append(f"macro-F1: {report.macro_f1:.4f}" + ("  (degenerate)" if report.degenerate else ""))
    return "\n".join(lines)
