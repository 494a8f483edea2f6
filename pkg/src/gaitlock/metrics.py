"""Confusion matrix and the four classification measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, LengthMismatch


@dataclass
class ConfusionMatrix:
    """counts[i][j] = samples of true class i predicted as class j."""

    classes: list[str]
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def evaluate(truth, predicted) -> ConfusionMatrix:
    """Tally a confusion matrix over the sorted union of observed labels."""
    truth = [str(t) for t in truth]
    predicted = [str(p) for p in predicted]
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} truth labels vs {len(predicted)} predictions")
    if not truth:
        raise EmptyInput("no samples to evaluate")
    classes = sorted(set(truth) | set(predicted))
    index = {cls: i for i, cls in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        counts[index[t], index[p]] += 1
    return ConfusionMatrix(classes, counts)


def measures(cm: ConfusionMatrix) -> dict[str, float]:
    """Accuracy plus macro-averaged precision, recall and F-measure.

    Per class, precision = TP / (TP + FP) and recall = TP / (TP + FN); a
    class never predicted (resp. never occurring) contributes 0 so the
    averages stay defined on degenerate splits. The F-measure is the
    harmonic mean of the two macro averages, 0 when both are 0.
    """
    counts = cm.counts
    total = counts.sum()
    if total == 0:
        raise EmptyInput("empty confusion matrix")
    diag = np.diag(counts).astype(np.float64)
    predicted_per_class = counts.sum(axis=0).astype(np.float64)
    actual_per_class = counts.sum(axis=1).astype(np.float64)
    precision_per_class = np.divide(
        diag, predicted_per_class, out=np.zeros_like(diag), where=predicted_per_class > 0
    )
    recall_per_class = np.divide(
        diag, actual_per_class, out=np.zeros_like(diag), where=actual_per_class > 0
    )
    precision = float(precision_per_class.mean())
    recall = float(recall_per_class.mean())
    if precision + recall > 0.0:
        f_measure = 2.0 * precision * recall / (precision + recall)
    else:
        f_measure = 0.0
    return {
        "accuracy": float(diag.sum() / total),
        "precision": precision,
        "recall": recall,
        "f_measure": f_measure,
    }
