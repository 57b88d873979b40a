"""Online linear classifiers: logistic regression (SGD) and the perceptron.

Binary problems use a single weight vector; more classes fall back to
one-vs-rest scoring.
"""

from __future__ import annotations

import math

import numpy as np

from driftml.learners.base import Classifier, argmax_class


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


class LogisticRegression(Classifier):
    """SGD on log-loss with a constant learning rate."""

    def __init__(self, classes, learning_rate: float = 0.01):
        super().__init__(classes)
        self.learning_rate = learning_rate
        self._w: np.ndarray | None = None  # binary: (d,); multiclass: (C, d)
        self._b = None

    def _init(self, d: int) -> None:
        if len(self.classes) == 2:
            self._w = np.zeros(d)
            self._b = 0.0
        else:
            self._w = np.zeros((len(self.classes), d))
            self._b = np.zeros(len(self.classes))

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        if self._w is None:
            return self._uniform()
        if len(self.classes) == 2:
            p1 = _sigmoid(float(self._w @ x) + self._b)
            return {self.classes[0]: 1.0 - p1, self.classes[1]: p1}
        scores = self._w @ x + self._b
        probs = np.array([_sigmoid(float(s)) for s in scores])
        total = float(probs.sum())
        if total == 0.0:
            return self._uniform()
        return {c: float(p) / total for c, p in zip(self.classes, probs)}

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        if self._w is None:
            self._init(len(x))
        lr = self.learning_rate * weight
        if len(self.classes) == 2:
            target = 1.0 if y == self.classes[1] else 0.0
            p = _sigmoid(float(self._w @ x) + self._b)
            self._w += lr * (target - p) * x
            self._b += lr * (target - p)
        else:
            for i, c in enumerate(self.classes):
                target = 1.0 if y == c else 0.0
                p = _sigmoid(float(self._w[i] @ x) + self._b[i])
                self._w[i] += lr * (target - p) * x
                self._b[i] += lr * (target - p)


class Perceptron(Classifier):
    """Classic mistake-driven perceptron; updates only on wrong predictions."""

    def __init__(self, classes):
        super().__init__(classes)
        self._w: np.ndarray | None = None
        self._b = None

    @property
    def weights(self) -> np.ndarray | None:
        return self._w

    def _init(self, d: int) -> None:
        if len(self.classes) == 2:
            self._w = np.zeros(d)
            self._b = 0.0
        else:
            self._w = np.zeros((len(self.classes), d))
            self._b = np.zeros(len(self.classes))

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        if self._w is None:
            return self._uniform()
        if len(self.classes) == 2:
            p1 = _sigmoid(float(self._w @ x) + self._b)
            return {self.classes[0]: 1.0 - p1, self.classes[1]: p1}
        scores = self._w @ x + self._b
        shifted = np.exp(scores - scores.max())
        shifted /= shifted.sum()
        return {c: float(p) for c, p in zip(self.classes, shifted)}

    def predict_one(self, x: np.ndarray) -> int:
        if self._w is None:
            return self.classes[0]
        if len(self.classes) == 2:
            margin = float(self._w @ x) + self._b
            return self.classes[1] if margin > 0.0 else self.classes[0]
        scores = self._w @ x + self._b
        proba = {c: float(s) for c, s in zip(self.classes, scores)}
        return argmax_class(proba, self.classes)

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        if self._w is None:
            self._init(len(x))
        pred = self.predict_one(x)
        if pred == y:
            return
        if len(self.classes) == 2:
            sign = 1.0 if y == self.classes[1] else -1.0
            self._w += weight * sign * x
            self._b += weight * sign
        else:
            yi = self.classes.index(y)
            pi = self.classes.index(pred)
            self._w[yi] += weight * x
            self._b[yi] += weight
            self._w[pi] -= weight * x
            self._b[pi] -= weight
