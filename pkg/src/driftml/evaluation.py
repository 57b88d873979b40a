"""Prequential (interleaved test-then-train) evaluation and run tracing.

The evaluation order is fixed: predict first, score the prediction, only then
train on the sample. ``score_on_window`` applies that loop to a window copy so
comparisons between live models never corrupt their state.
"""

from __future__ import annotations

import copy
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from driftml.streams import Instance

TRACE_HEADER = "index,prediction,truth,acc_cum,acc_win,verdict,source,retrain,classifier"


class Accuracy:
    """Fraction of correct predictions; the default online and search metric."""

    name = "accuracy"

    def __init__(self):
        self.correct = 0
        self.total = 0

    def update(self, y_true: int, y_pred: int) -> None:
        self.total += 1
        self.correct += 1 if y_true == y_pred else 0

    @property
    def value(self) -> float:
        return self.correct / self.total if self.total else 0.0

    @property
    def loss(self) -> float:
        """Minimization view used wherever lower-is-better comparisons apply."""
        return 1.0 - self.value


class BalancedAccuracy:
    """Mean per-class recall over the classes observed so far."""

    name = "balanced_accuracy"

    def __init__(self):
        self._correct: dict[int, int] = {}
        self._total: dict[int, int] = {}

    def update(self, y_true: int, y_pred: int) -> None:
        self._total[y_true] = self._total.get(y_true, 0) + 1
        if y_true == y_pred:
            self._correct[y_true] = self._correct.get(y_true, 0) + 1

    @property
    def value(self) -> float:
        if not self._total:
            return 0.0
        recalls = [self._correct.get(c, 0) / n for c, n in self._total.items()]
        return sum(recalls) / len(recalls)

    @property
    def loss(self) -> float:
        return 1.0 - self.value


class MacroF1:
    """Unweighted mean of per-class F1 over the classes observed so far."""

    name = "f1"

    def __init__(self):
        self._tp: dict[int, int] = {}
        self._fp: dict[int, int] = {}
        self._fn: dict[int, int] = {}

    def update(self, y_true: int, y_pred: int) -> None:
        if y_true == y_pred:
            self._tp[y_true] = self._tp.get(y_true, 0) + 1
        else:
            self._fp[y_pred] = self._fp.get(y_pred, 0) + 1
            self._fn[y_true] = self._fn.get(y_true, 0) + 1

    @property
    def value(self) -> float:
        classes = set(self._tp) | set(self._fp) | set(self._fn)
        if not classes:
            return 0.0
        scores = []
        for c in classes:
            tp = self._tp.get(c, 0)
            denom = 2 * tp + self._fp.get(c, 0) + self._fn.get(c, 0)
            scores.append(2 * tp / denom if denom else 0.0)
        return sum(scores) / len(scores)

    @property
    def loss(self) -> float:
        return 1.0 - self.value


METRICS = {"accuracy": Accuracy, "balanced_accuracy": BalancedAccuracy, "f1": MacroF1}


def make_metric(name: str):
    try:
        return METRICS[name]()
    except KeyError:
        raise ValueError(f"unknown metric {name!r}; choose from {sorted(METRICS)}") from None


class PrequentialMetric:
    """Cumulative score plus a rolling window of recent 0/1 outcomes.

    The windowed accuracy serves drift-recovery measurement regardless of the
    cumulative metric chosen.
    """

    def __init__(self, metric=None, window_capacity: int = 1000):
        self.metric = metric if metric is not None else Accuracy()
        self.correct_count = 0
        self.total_count = 0
        self.window: deque[int] = deque(maxlen=window_capacity)

    def update(self, y_true: int, y_pred: int) -> None:
        correct = 1 if y_true == y_pred else 0
        self.correct_count += correct
        self.total_count += 1
        self.window.append(correct)
        self.metric.update(y_true, y_pred)

    @property
    def accuracy(self) -> float:
        return self.correct_count / self.total_count if self.total_count else 0.0

    @property
    def window_accuracy(self) -> float:
        return sum(self.window) / len(self.window) if self.window else 0.0

    @property
    def value(self) -> float:
        return self.metric.value

    @property
    def loss(self) -> float:
        return self.metric.loss


def prequential_step(model, metric, instance: Instance) -> int:
    """Predict, score, then train -- in exactly that order."""
    if instance.label is None:
        raise ValueError(f"instance {instance.index} has no label")
    prediction = model.predict_one(instance.features)
    metric.update(instance.label, prediction)
    model.learn_one(instance.features, instance.label)
    return prediction


def score_on_window(model, window: Iterable[Instance], clone: bool = True,
                    metric=None) -> float:
    """Prequential score of ``model`` over ``window``.

    With ``clone=True`` (the default) the pass runs on a deep copy, leaving
    the live model untouched; comparisons of candidate models must use it.
    """
    window = list(window)
    if not window:
        raise ValueError("cannot score on an empty window")
    subject = copy.deepcopy(model) if clone else model
    metric = metric if metric is not None else Accuracy()
    for instance in window:
        prequential_step(subject, metric, instance)
    return metric.value


@dataclass
class TraceRow:
    index: int
    prediction: int
    truth: int
    acc_cum: float
    acc_win: float
    verdict: str
    source: str
    retrain: int
    classifier: str

    def as_csv(self) -> str:
        return (
            f"{self.index},{self.prediction},{self.truth},"
            f"{self.acc_cum:.6f},{self.acc_win:.6f},{self.verdict},"
            f"{self.source},{self.retrain},{self.classifier}"
        )


class RunTrace:
    """Per-sample log of one online run."""

    def __init__(self, decimate_after: int = 100_000, decimate_step: int = 10):
        self.rows: list[TraceRow] = []
        self.decimate_after = decimate_after
        self.decimate_step = decimate_step

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def write_csv(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(TRACE_HEADER + "\n")
            for i, row in enumerate(self.rows):
                if i >= self.decimate_after and i % self.decimate_step != 0:
                    continue
                fh.write(row.as_csv() + "\n")

    @property
    def final_accuracy(self) -> Optional[float]:
        return self.rows[-1].acc_cum if self.rows else None
