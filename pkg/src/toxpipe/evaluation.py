"""Confusion-matrix metrics and cost-benefit analysis of classifier errors."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class EvalError(Exception):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: tuple  # 3x3, entry (i, j) = true class i predicted as class j

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.shape != (3, 3) or (arr < 0).any():
            raise EvalError("confusion matrix must be 3x3 non-negative")

    @property
    def array(self):
        return np.asarray(self.counts, dtype=np.int64)

    def total(self):
        return int(self.array.sum())

    def to_csv(self) -> str:
        return "\n".join(",".join(str(v) for v in row) for row in self.counts) + "\n"


@dataclass(frozen=True)
class CostMatrix:
    """Per-outcome economic weights; true positives and true negatives default
    to zero, so only misclassifications carry cost."""
    costs: tuple = ((0.0, 0.0, 0.0), (0.0, 0.0, 0.0), (0.0, 0.0, 0.0))
    false_positive_cost: float = 0.0
    false_negative_cost: float = 0.0

    def __post_init__(self):
        if np.asarray(self.costs).shape != (3, 3):
            raise EvalError("cost matrix must be 3x3")

    @classmethod
    def from_binary(cls, fp_cost: float, fn_cost: float) -> "CostMatrix":
        """Binary hate-vs-acceptable framing: class 0 is positive, classes 1 and 2
        negative. FP = acceptable predicted as hate; FN = hate predicted acceptable."""
        costs = [[0.0] * 3 for _ in range(3)]
        for j in (1, 2):
            costs[0][j] = fn_cost
        for i in (1, 2):
            costs[i][0] = fp_cost
        return cls(tuple(tuple(r) for r in costs),
                   false_positive_cost=fp_cost, false_negative_cost=fn_cost)


def confusion(preds, labels) -> ConfusionMatrix:
    if len(preds) != len(labels):
        raise EvalError(f"length mismatch: {len(preds)} preds vs {len(labels)} labels")
    if len(preds) == 0:
        raise EvalError("empty inputs")
    counts = np.zeros((3, 3), dtype=np.int64)
    for p, y in zip(preds, labels):
        counts[y][p] += 1
    return ConfusionMatrix(tuple(tuple(int(v) for v in row) for row in counts))


def metrics(cm: ConfusionMatrix) -> dict:
    arr = cm.array
    total = arr.sum()
    if total == 0:
        raise EvalError("empty confusion matrix")
    out = {"accuracy": float(np.trace(arr) / total), "per_class": {}}
    for k in range(3):
        col = arr[:, k].sum()
        row = arr[k, :].sum()
        precision = float(arr[k, k] / col) if col else 0.0
        recall = float(arr[k, k] / row) if row else 0.0
        f1 = (2 * precision * recall / (precision + recall)) if precision + recall else 0.0
        out["per_class"][k] = {
            "precision": precision, "precision_defined": bool(col),
            "recall": recall, "recall_defined": bool(row),
            "f1": f1,
        }
    return out


def expected_cost(cm: ConfusionMatrix, costs: CostMatrix) -> float:
    return float((cm.array * np.asarray(costs.costs, dtype=np.float64)).sum())


def binary_error_counts(cm: ConfusionMatrix) -> dict:
    """Hate-vs-acceptable view: FP = acceptable flagged as hate, FN = hate missed."""
    arr = cm.array
    return {
        "false_positives": int(arr[1, 0] + arr[2, 0]),
        "false_negatives": int(arr[0, 1] + arr[0, 2]),
        "true_positives": int(arr[0, 0]),
        "true_negatives": int(arr[1:, 1:].sum()),
    }


def report_to_json(cm: ConfusionMatrix, costs: CostMatrix) -> str:
    m = metrics(cm)
    return json.dumps({
        "confusion": [list(r) for r in cm.counts],
        "accuracy": m["accuracy"],
        "per_class": {str(k): v for k, v in m["per_class"].items()},
        "binary": binary_error_counts(cm),
        "expected_cost": expected_cost(cm, costs),
    }, indent=2)
