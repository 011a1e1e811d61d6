"""Metrics over model decisions.

Two definitional choices live here and are stamped into every report:

* frr (false rejection rate) is fp / (fp + tn) after collapsing classes to
  attack-vs-normal: the share of genuinely normal traffic that got flagged.
* on multiclass tasks, precision and recall are macro-averaged over classes
  and f1 is the harmonic mean of those two reported numbers.

Any ratio whose denominator is zero is reported as 0 rather than NaN.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import UsageError
from .model import Classifier, predict


@dataclass
class ConfusionCounts:
    """C x C tally of (true row, predicted column) pairs.

    Carries the index of the "normal" class so attack-vs-normal numbers can
    be derived from the same matrix.
    """

    matrix: np.ndarray
    normal_class: int = 0

    @property
    def total(self) -> int:
        return int(self.matrix.sum())

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]

    def binarized(self):
        """(tp, fp, tn, fn) with every non-normal class pooled as "attack"."""
        g = self.normal_class
        normal_row = self.matrix[g, :]
        tn = int(normal_row[g])
        fp = int(normal_row.sum() - normal_row[g])
        attack_rows = np.delete(self.matrix, g, axis=0)
        fn = int(attack_rows[:, g].sum())
        tp = int(attack_rows.sum() - attack_rows[:, g].sum())
        return tp, fp, tn, fn


def compare(y_real, y_pred, num_classes: int | None = None, normal_class: int = 0) -> ConfusionCounts:
    """Exact tally of predictions against ground truth."""
    y_real = np.asarray(y_real, dtype=np.int64).reshape(-1)
    y_pred = np.asarray(y_pred, dtype=np.int64).reshape(-1)
    if y_real.shape != y_pred.shape:
        raise UsageError(
            f"length mismatch: {y_real.shape[0]} true labels, {y_pred.shape[0]} predictions"
        )
    if y_real.size == 0:
        raise UsageError("cannot compare empty label vectors")
    if num_classes is None:
        num_classes = int(max(y_real.max(), y_pred.max())) + 1
        num_classes = max(num_classes, 2)
    if y_real.min() < 0 or y_pred.min() < 0:
        raise UsageError("labels must be non-negative class indices")
    if max(int(y_real.max()), int(y_pred.max())) >= num_classes:
        raise UsageError(f"labels exceed the declared {num_classes} classes")
    matrix = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(matrix, (y_real, y_pred), 1)
    return ConfusionCounts(matrix=matrix, normal_class=normal_class)


def _ratio(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


@dataclass
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    frr: float
    n_test: int
    per_class: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "frr": self.frr,
            "n_test": self.n_test,
            "per_class": self.per_class,
        }


def metrics_from_counts(counts: ConfusionCounts) -> MetricsReport:
    matrix = counts.matrix
    total = counts.total
    if total == 0:
        raise UsageError("confusion matrix is empty")
    accuracy = _ratio(float(np.trace(matrix)), float(total))

    per_class = {}
    precisions, recalls = [], []
    for c in range(counts.num_classes):
        col = float(matrix[:, c].sum())
        row = float(matrix[c, :].sum())
        p = _ratio(float(matrix[c, c]), col)
        r = _ratio(float(matrix[c, c]), row)
        f = _ratio(2.0 * p * r, p + r)
        per_class[c] = {"precision": p, "recall": r, "f1": f, "support": int(row)}
        precisions.append(p)
        recalls.append(r)

    tp, fp, tn, fn = counts.binarized()
    frr = _ratio(float(fp), float(fp + tn))

    if counts.num_classes == 2:
        # binary task: report the attack class directly
        attack = 1 - counts.normal_class
        precision = per_class[attack]["precision"]
        recall = per_class[attack]["recall"]
    else:
        precision = float(np.mean(precisions))
        recall = float(np.mean(recalls))
    f1 = _ratio(2.0 * precision * recall, precision + recall)

    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        frr=frr,
        n_test=total,
        per_class=per_class,
    )


def evaluate(clf: Classifier, windows: np.ndarray, labels: np.ndarray, normal_class: int = 0) -> MetricsReport:
    """Predict every window and summarize the confusion against the labels."""
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size == 0:
        raise UsageError("test batch is empty")
    y_pred = predict(clf, windows)
    counts = compare(labels, y_pred, num_classes=clf.config.num_classes, normal_class=normal_class)
    return metrics_from_counts(counts)


def render_report(report: MetricsReport) -> str:
    """Human-readable key:value report with the definitional choices up top."""
    lines = [
        "# frr = fp / (fp + tn) on the attack-vs-normal binarization",
        "# multiclass precision/recall are macro-averaged;"
        " f1 is the harmonic mean of the reported precision and recall",
        f"accuracy: {report.accuracy:.6f}",
        f"precision: {report.precision:.6f}",
        f"recall: {report.recall:.6f}",
        f"f1: {report.f1:.6f}",
        f"frr: {report.frr:.6f}",
        f"n_test: {report.n_test}",
        "per_class:",
    ]
    for c in sorted(report.per_class):
        stats = report.per_class[c]
        lines.append(
            f"  {c}: precision={stats['precision']:.6f} recall={stats['recall']:.6f} "
            f"f1={stats['f1']:.6f} support={stats['support']}"
        )
    return "\n".join(lines) + "\n"
