"""Adaptive online ensembles: Oza/Leveraging bagging, online AdaBoost, ARF.

All ensembles train members with Poisson-drawn sample weights (per-member
seeded RNGs, so member updates are order-independent) and vote by weighted or
unweighted hard votes with ties broken toward the lowest class id. Bagging
members carry an ADWIN on their own prediction errors and are rebuilt from
scratch when it fires.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from driftml.detectors import LEARNER_MONITOR_INTERVAL, Adwin
from driftml.learners.base import Classifier, normalize_votes
from driftml.learners.trees import HoeffdingTreeClassifier


def _spawn_rngs(seed, n: int) -> list[np.random.Generator]:
    seq = np.random.SeedSequence(seed)
    return [np.random.default_rng(child) for child in seq.spawn(n)]


class _VotingEnsemble(Classifier):
    def __init__(self, classes):
        super().__init__(classes)
        self.members: list[Classifier] = []

    def _vote(self, x: np.ndarray, weights=None) -> dict[int, float]:
        votes: dict[int, float] = {}
        for i, member in enumerate(self.members):
            w = 1.0 if weights is None else weights[i]
            if w <= 0.0:
                continue
            pred = member.predict_one(x)
            votes[pred] = votes.get(pred, 0.0) + w
        return votes

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        return normalize_votes(self._vote(x), self.classes)


class OzaBagging(_VotingEnsemble):
    """Online bagging: every member trains with weight ~ Poisson(1).

    Each member's error stream runs through its own ADWIN; a cut rebuilds that
    member from the factory.
    """

    def __init__(self, classes, base_factory: Callable[[], Classifier],
                 n_models: int = 10, adwin_delta: float = 0.002, seed=None):
        super().__init__(classes)
        if n_models < 1:
            raise ValueError("n_models must be >= 1")
        self.base_factory = base_factory
        self.adwin_delta = adwin_delta
        self.members = [base_factory() for _ in range(n_models)]
        self._rngs = _spawn_rngs(seed, n_models)
        self._adwins = [Adwin(delta=adwin_delta, check_interval=LEARNER_MONITOR_INTERVAL)
                        for _ in range(n_models)]

    def _training_weight(self, i: int, member: Classifier, x, y) -> float:
        return float(self._rngs[i].poisson(1.0))

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        for i, member in enumerate(self.members):
            error = 0.0 if member.predict_one(x) == y else 1.0
            k = self._training_weight(i, member, x, y)
            if k > 0.0:
                member.learn_one(x, y, weight * k)
            if self._adwins[i].update(error):
                self.members[i] = self.base_factory()
                self._adwins[i] = Adwin(delta=self.adwin_delta,
                                        check_interval=LEARNER_MONITOR_INTERVAL)


class LeveragingBagging(OzaBagging):
    """Bagging with leveraged resampling weights.

    ``bagging_method`` picks the weight rule, with ``w`` scaling the Poisson
    mean of the default rule:
      bag   -- Poisson(6w)
      me    -- 1 if the member just misclassified, else 1 with probability
               e/(1-e) (e = member's ADWIN error estimate)
      half  -- 1 with probability 0.5
      wt    -- 1 + Poisson(1)
      subag -- min(Poisson(1), 1), i.e. subsampling without replacement
    """

    BASE_LAMBDA = 6.0
    METHODS = ("bag", "me", "half", "wt", "subag")

    def __init__(self, classes, base_factory: Callable[[], Classifier],
                 n_models: int = 10, w: float = 1.0, adwin_delta: float = 0.002,
                 bagging_method: str = "bag", seed=None):
        if bagging_method not in self.METHODS:
            raise ValueError(
                f"unsupported bagging_method {bagging_method!r}; choose from {self.METHODS}"
            )
        super().__init__(classes, base_factory, n_models, adwin_delta, seed)
        self.w = w
        self.bagging_method = bagging_method

    def _training_weight(self, i: int, member: Classifier, x, y) -> float:
        rng = self._rngs[i]
        method = self.bagging_method
        if method == "bag":
            return float(rng.poisson(self.BASE_LAMBDA * self.w))
        if method == "me":
            if member.predict_one(x) != y:
                return 1.0
            e = min(self._adwins[i].mean, 1.0 - 1e-9)
            return 1.0 if rng.random() < e / (1.0 - e) else 0.0
        if method == "half":
            return 1.0 if rng.random() < 0.5 else 0.0
        if method == "wt":
            return 1.0 + float(rng.poisson(1.0))
        return min(float(rng.poisson(1.0)), 1.0)  # subag


class OnlineAdaBoost(_VotingEnsemble):
    """Oza's online boosting.

    A sample's weight ``lam`` flows through the members in order: a correct
    member prediction shrinks it by 1/(2(1-e)), a miss inflates it by 1/(2e),
    with e the member's tracked weighted error. Votes are weighted by
    log((1-e)/e); members at or above e = 0.5 contribute nothing.
    """

    LAMBDA_CAP = 1e6  # numeric guard against runaway weight inflation

    def __init__(self, classes, base_factory: Callable[[], Classifier],
                 n_models: int = 10, seed=None):
        super().__init__(classes)
        if n_models < 1:
            raise ValueError("n_models must be >= 1")
        self.base_factory = base_factory
        self.members = [base_factory() for _ in range(n_models)]
        self._rngs = _spawn_rngs(seed, n_models)
        self._correct_weight = [0.0] * n_models
        self._wrong_weight = [0.0] * n_models

    def member_error(self, i: int) -> float:
        total = self._correct_weight[i] + self._wrong_weight[i]
        return self._wrong_weight[i] / total if total > 0.0 else 0.0

    def member_vote_weight(self, i: int) -> float:
        total = self._correct_weight[i] + self._wrong_weight[i]
        if total <= 0.0:
            return 0.0
        eps = max(self.member_error(i), 1e-10)
        if eps >= 0.5:
            return 0.0
        return math.log((1.0 - eps) / eps)

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        lam = weight
        for i, member in enumerate(self.members):
            k = float(self._rngs[i].poisson(lam))
            if k > 0.0:
                member.learn_one(x, y, k)
            if member.predict_one(x) == y:
                self._correct_weight[i] += lam
                eps = self.member_error(i)
                lam *= 1.0 / (2.0 * (1.0 - eps))
            else:
                self._wrong_weight[i] += lam
                eps = max(self.member_error(i), 1e-10)
                lam *= 1.0 / (2.0 * eps)
            lam = min(lam, self.LAMBDA_CAP)

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        weights = [self.member_vote_weight(i) for i in range(len(self.members))]
        if all(w <= 0.0 for w in weights):
            weights = None  # cold start / degenerate: plain majority
        return normalize_votes(self._vote(x, weights), self.classes)


class AdaptiveRandomForest(_VotingEnsemble):
    """Random forest for streams: per-tree resampling, feature-subset splits,
    and warning/drift detectors that grow and swap in background trees."""

    WARN_DELTA = 0.01
    DRIFT_DELTA = 0.001

    def __init__(self, classes, n_models: int = 10, max_features="sqrt",
                 lambda_value: float = 6.0, grace_period: int = 50,
                 split_confidence: float = 1e-2, tie_threshold: float = 0.05,
                 leaf_prediction: str = "nba", nb_threshold: int = 0, seed=None):
        super().__init__(classes)
        if n_models < 1:
            raise ValueError("n_models must be >= 1")
        self.n_models = n_models
        self.max_features = max_features
        self.lambda_value = lambda_value
        self._tree_kwargs = dict(
            grace_period=grace_period,
            split_confidence=split_confidence,
            tie_threshold=tie_threshold,
            leaf_prediction=leaf_prediction,
            nb_threshold=nb_threshold,
            max_features=max_features,
        )
        self._seed_seq = np.random.SeedSequence(seed)
        self._rngs = _spawn_rngs(seed, n_models)
        self.members = [self._new_tree() for _ in range(n_models)]
        self._background: list[HoeffdingTreeClassifier | None] = [None] * n_models
        self._warn = [Adwin(delta=self.WARN_DELTA, check_interval=LEARNER_MONITOR_INTERVAL)
                      for _ in range(n_models)]
        self._drift = [Adwin(delta=self.DRIFT_DELTA, check_interval=LEARNER_MONITOR_INTERVAL)
                       for _ in range(n_models)]

    def _new_tree(self) -> HoeffdingTreeClassifier:
        child_seed = self._seed_seq.spawn(1)[0]
        return HoeffdingTreeClassifier(self.classes, seed=child_seed, **self._tree_kwargs)

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        for i, tree in enumerate(self.members):
            error = 0.0 if tree.predict_one(x) == y else 1.0
            k = float(self._rngs[i].poisson(self.lambda_value))
            if k > 0.0:
                tree.learn_one(x, y, weight * k)
                if self._background[i] is not None:
                    self._background[i].learn_one(x, y, weight * k)
            warned = self._warn[i].update(error)
            drifted = self._drift[i].update(error)
            if drifted:
                self.members[i] = self._background[i] or self._new_tree()
                self._background[i] = None
                self._warn[i] = Adwin(delta=self.WARN_DELTA,
                                      check_interval=LEARNER_MONITOR_INTERVAL)
                self._drift[i] = Adwin(delta=self.DRIFT_DELTA,
                                       check_interval=LEARNER_MONITOR_INTERVAL)
            elif warned and self._background[i] is None:
                self._background[i] = self._new_tree()
