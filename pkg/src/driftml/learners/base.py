"""Shared classifier contract for all online learners."""

from __future__ import annotations

import numpy as np


class Classifier:
    """Incremental classifier: predict / predict-proba / learn, one sample at a time.

    ``predict_proba_one`` returns a distribution over the full class set
    (summing to 1); ``predict_one`` is its argmax with ties broken toward the
    lowest class id so replays are deterministic.
    """

    def __init__(self, classes: tuple[int, ...]):
        if len(classes) < 2:
            raise ValueError("need at least two classes")
        self.classes = tuple(sorted(classes))

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        raise NotImplementedError

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        raise NotImplementedError

    def predict_one(self, x: np.ndarray) -> int:
        proba = self.predict_proba_one(x)
        return argmax_class(proba, self.classes)

    def _uniform(self) -> dict[int, float]:
        p = 1.0 / len(self.classes)
        return {c: p for c in self.classes}


def argmax_class(proba: dict[int, float], classes: tuple[int, ...]) -> int:
    """Most probable class; exact ties go to the lowest class id."""
    best = classes[0]
    best_p = proba.get(best, 0.0)
    for c in classes[1:]:
        p = proba.get(c, 0.0)
        if p > best_p:
            best, best_p = c, p
    return best


def normalize_votes(votes: dict[int, float], classes: tuple[int, ...]) -> dict[int, float]:
    """Scale non-negative vote mass into a distribution; all-zero -> uniform."""
    total = sum(votes.values())
    if total <= 0.0:
        p = 1.0 / len(classes)
        return {c: p for c in classes}
    return {c: votes.get(c, 0.0) / total for c in classes}
