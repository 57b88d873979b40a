"""Trained online pipeline: an ordered chain of transformers ending in a classifier.

Prediction only transforms; training first updates each transformer's
statistics, then feeds the transformed vector onward, and finally trains the
classifier -- so every stage sees each sample exactly once.
"""

from __future__ import annotations

import copy

import numpy as np


class OnlinePipeline:
    def __init__(self, preprocessors, classifier, descriptor: str = ""):
        self.preprocessors = list(preprocessors)
        self.classifier = classifier
        self.descriptor = descriptor or type(classifier).__name__

    @property
    def classifier_name(self) -> str:
        return type(self.classifier).__name__

    def _transform(self, x: np.ndarray) -> np.ndarray:
        for prep in self.preprocessors:
            x = prep.transform_one(x)
        return x

    def predict_one(self, x: np.ndarray) -> int:
        return self.classifier.predict_one(self._transform(x))

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        return self.classifier.predict_proba_one(self._transform(x))

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        for prep in self.preprocessors:
            prep.learn_one(x)
            x = prep.transform_one(x)
        self.classifier.learn_one(x, y, weight)

    def clone(self) -> "OnlinePipeline":
        """Deep copy including all learned state."""
        return copy.deepcopy(self)
