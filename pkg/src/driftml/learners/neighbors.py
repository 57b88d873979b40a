"""Windowed k-nearest-neighbors classifier."""

from __future__ import annotations

import numpy as np

from driftml.learners.base import Classifier, normalize_votes


class KNNClassifier(Classifier):
    """Majority vote among the k nearest of the last ``window_size`` samples.

    Memory is O(window_size) by design. Neighbor selection is a pure function
    of the stored window, so replays are deterministic; an empty window
    predicts the lowest class id.
    """

    def __init__(self, classes, k: int = 5, window_size: int = 1000):
        super().__init__(classes)
        if k < 1 or window_size < 1:
            raise ValueError("k and window_size must be >= 1")
        self.k = k
        self.window_size = window_size
        self._X: np.ndarray | None = None
        self._y: np.ndarray | None = None
        self._count = 0
        self._next = 0

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        # Sample weights do not replicate entries; any positive weight stores once.
        if weight <= 0.0:
            return
        if self._X is None:
            self._X = np.empty((self.window_size, len(x)))
            self._y = np.empty(self.window_size, dtype=np.int64)
        self._X[self._next] = x
        self._y[self._next] = y
        self._next = (self._next + 1) % self.window_size
        self._count = min(self._count + 1, self.window_size)

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        if self._count == 0:
            votes = {self.classes[0]: 1.0}
            return normalize_votes(votes, self.classes)
        X = self._X[: self._count]
        diff = X - x
        d2 = np.einsum("ij,ij->i", diff, diff)
        k = min(self.k, self._count)
        if k < self._count:
            nearest = np.argpartition(d2, k - 1)[:k]
        else:
            nearest = np.arange(self._count)
        votes: dict[int, float] = {}
        for idx in nearest:
            label = int(self._y[idx])
            votes[label] = votes.get(label, 0.0) + 1.0
        return normalize_votes(votes, self.classes)
