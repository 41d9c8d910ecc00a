"""Confusion-matrix evaluation: per-class precision/recall/F1 and macro F1."""
from __future__ import annotations

from dataclasses import dataclass

from .corpus import Label, LabeledDataset
from .ensemble import PredictionSet
from .errors import DomainError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with SUBJ as the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise DomainError("confusion counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class ClassReport:
    per_class: dict[Label, tuple[float, float, float]]  # (precision, recall, f1)
    macro_f1: float
    accuracy: float


def confusion(pred: PredictionSet, gold: LabeledDataset) -> ConfusionMatrix:
    tp = fp = fn = tn = 0
    for s in gold:
        if s.id not in pred.predictions:
            raise DomainError(f"no prediction for gold id {s.id!r}")
        predicted = pred.predictions[s.id]
        if s.label is Label.SUBJ:
            if predicted is Label.SUBJ:
                tp += 1
            else:
                fn += 1
        else:
            if predicted is Label.SUBJ:
                fp += 1
            else:
                tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    # 0/0 ratios are defined as 0 so degenerate folds still report
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def report(cm: ConfusionMatrix) -> ClassReport:
    if cm.total == 0:
        raise DomainError("cannot report on an empty confusion matrix")
    subj = _prf(cm.tp, cm.fp, cm.fn)
    obj = _prf(cm.tn, cm.fn, cm.fp)
    return ClassReport(
        per_class={Label.SUBJ: subj, Label.OBJ: obj},
        macro_f1=(subj[2] + obj[2]) / 2.0,
        accuracy=(cm.tp + cm.tn) / cm.total,
    )


def format_report_text(r: ClassReport) -> str:
    lines = []
    for label, (precision, recall, f1) in r.per_class.items():
        lines.append(f"{label.value.lower()}_precision = {precision:.6f}")
        lines.append(f"{label.value.lower()}_recall = {recall:.6f}")
        lines.append(f"{label.value.lower()}_f1 = {f1:.6f}")
    lines.append(f"macro_f1 = {r.macro_f1:.6f}")
    lines.append(f"accuracy = {r.accuracy:.6f}")
    return "\n".join(lines) + "\n"


def format_report_tsv(r: ClassReport) -> str:
    lines = ["metric\tclass\tvalue"]
    for label, (precision, recall, f1) in r.per_class.items():
        lines.append(f"precision\t{label.value}\t{precision:.6f}")
        lines.append(f"recall\t{label.value}\t{recall:.6f}")
        lines.append(f"f1\t{label.value}\t{f1:.6f}")
    lines.append(f"macro_f1\t-\t{r.macro_f1:.6f}")
    lines.append(f"accuracy\t-\t{r.accuracy:.6f}")
    return "\n".join(lines) + "\n"
