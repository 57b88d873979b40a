from driftml.learners.base import Classifier, argmax_class, normalize_votes
from driftml.learners.ensembles import (
    AdaptiveRandomForest,
    LeveragingBagging,
    OnlineAdaBoost,
    OzaBagging,
)
from driftml.learners.linear import LogisticRegression, Perceptron
from driftml.learners.neighbors import KNNClassifier
from driftml.learners.trees import (
    HoeffdingAdaptiveTreeClassifier,
    HoeffdingTreeClassifier,
    hoeffding_bound,
)

__all__ = [
    "AdaptiveRandomForest",
    "Classifier",
    "HoeffdingAdaptiveTreeClassifier",
    "HoeffdingTreeClassifier",
    "KNNClassifier",
    "LeveragingBagging",
    "LogisticRegression",
    "OnlineAdaBoost",
    "OzaBagging",
    "Perceptron",
    "argmax_class",
    "hoeffding_bound",
    "normalize_votes",
]
