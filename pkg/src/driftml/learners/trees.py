"""Hoeffding trees: the incremental decision tree and its drift-adaptive variant.

Numeric attributes are summarized per leaf with one Gaussian per (feature,
class); split candidates are a fixed number of thresholds spaced across the
observed range, with class mass on each side estimated from the Gaussians.
A leaf splits when the merit gap between its best and second-best candidate
clears the Hoeffding bound (or the bound drops below the tie threshold) and
the best candidate has strictly positive gain.

The adaptive variant puts an ADWIN on every internal node's subtree error;
a detected change starts an alternate subtree that trains in parallel and
replaces the original once its error is significantly lower.
"""

from __future__ import annotations

import math

import numpy as np

from driftml.detectors import LEARNER_MONITOR_INTERVAL, Adwin
from driftml.learners.base import Classifier, argmax_class

_SQRT2 = math.sqrt(2.0)
_LOG_2PI = math.log(2.0 * math.pi)


def hoeffding_bound(value_range: float, delta: float, n: float) -> float:
    """Confidence radius sqrt(R^2 ln(1/delta) / 2n) for a mean of n observations."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if value_range <= 0.0:
        raise ValueError("value_range must be > 0")
    return math.sqrt(value_range * value_range * math.log(1.0 / delta) / (2.0 * n))


class _GaussianStats:
    """Weighted running Gaussian (Welford) plus observed min/max for one
    (feature, class) pair."""

    __slots__ = ("weight", "mean", "m2", "lo", "hi")

    def __init__(self):
        self.weight = 0.0
        self.mean = 0.0
        self.m2 = 0.0
        self.lo = math.inf
        self.hi = -math.inf

    def update(self, value: float, weight: float) -> None:
        self.weight += weight
        delta = value - self.mean
        self.mean += weight * delta / self.weight
        self.m2 += weight * delta * (value - self.mean)
        if value < self.lo:
            self.lo = value
        if value > self.hi:
            self.hi = value

    @property
    def variance(self) -> float:
        return self.m2 / self.weight if self.weight > 0 else 0.0

    def mass_below(self, t: float) -> float:
        """Estimated fraction of this class's mass at or below threshold t."""
        if self.weight == 0.0:
            return 0.0
        if t < self.lo:
            return 0.0
        if t >= self.hi:
            return 1.0
        std = math.sqrt(self.variance)
        if std == 0.0:
            return 1.0 if self.mean <= t else 0.0
        z = (t - self.mean) / (std * _SQRT2)
        return 0.5 * (1.0 + math.erf(z))

    def pdf(self, value: float) -> float:
        if self.weight == 0.0:
            return 1.0
        var = max(self.variance, 1e-9)
        diff = value - self.mean
        return math.exp(-diff * diff / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)

    def log_pdf(self, value: float) -> float:
        if self.weight == 0.0:
            return 0.0
        var = self.m2 / self.weight
        if var < 1e-9:
            var = 1e-9
        diff = value - self.mean
        return -0.5 * (diff * diff / var + _LOG_2PI + math.log(var))


def _entropy(counts: dict[int, float], total: float) -> float:
    if total <= 0.0:
        return 0.0
    h = 0.0
    for w in counts.values():
        if w > 0.0:
            p = w / total
            h -= p * math.log2(p)
    return h


def _gini(counts: dict[int, float], total: float) -> float:
    if total <= 0.0:
        return 0.0
    return 1.0 - sum((w / total) ** 2 for w in counts.values() if w > 0.0)


def _split_merit(criterion: str, parent: dict[int, float],
                 left: dict[int, float], right: dict[int, float]) -> float:
    """Gain of the candidate split over leaving the leaf as-is (null = 0)."""
    w_l = sum(left.values())
    w_r = sum(right.values())
    total = w_l + w_r
    if total <= 0.0:
        return 0.0
    if criterion == "info_gini":
        child = (w_l * _entropy(left, w_l) + w_r * _entropy(right, w_r)) / total
        return _entropy(parent, total) - child
    if criterion == "gini":
        child = (w_l * _gini(left, w_l) + w_r * _gini(right, w_r)) / total
        return _gini(parent, total) - child
    if criterion == "hellinger":
        if w_l <= 0.0 or w_r <= 0.0:
            return 0.0
        acc = 0.0
        for c in set(parent) | set(left) | set(right):
            pl = left.get(c, 0.0) / w_l
            pr = right.get(c, 0.0) / w_r
            acc += (math.sqrt(pl) - math.sqrt(pr)) ** 2
        return math.sqrt(acc) / _SQRT2
    raise ValueError(f"unknown split criterion {criterion!r}")


def _merit_range(criterion: str, n_classes: int) -> float:
    if criterion == "info_gini":
        return math.log2(max(2, n_classes))
    return 1.0


class _Leaf:
    """Learning node: class counts, per-feature Gaussians, leaf-predictor stats."""

    __slots__ = ("class_counts", "feature_stats", "weight_seen",
                 "weight_at_last_attempt", "mc_correct", "nb_correct")

    def __init__(self, class_counts: dict[int, float] | None = None):
        self.class_counts: dict[int, float] = dict(class_counts or {})
        self.feature_stats: list[dict[int, _GaussianStats]] | None = None
        self.weight_seen = sum(self.class_counts.values())
        self.weight_at_last_attempt = self.weight_seen
        self.mc_correct = 0.0
        self.nb_correct = 0.0

    def majority_proba(self, classes) -> dict[int, float]:
        total = sum(self.class_counts.values())
        if total <= 0.0:
            p = 1.0 / len(classes)
            return {c: p for c in classes}
        return {c: self.class_counts.get(c, 0.0) / total for c in classes}

    def naive_bayes_proba(self, x: np.ndarray, classes) -> dict[int, float]:
        total = sum(self.class_counts.values())
        if total <= 0.0 or self.feature_stats is None:
            p = 1.0 / len(classes)
            return {c: p for c in classes}
        log_scores: dict[int, float] = {}
        feature_stats = self.feature_stats
        counts = self.class_counts
        for c in classes:
            prior = counts.get(c, 0.0)
            if prior <= 0.0:
                continue
            score = math.log(prior / total)
            for f, stats_by_class in enumerate(feature_stats):
                stats = stats_by_class.get(c)
                if stats is not None and stats.weight > 0.0:
                    score += stats.log_pdf(float(x[f]))
            log_scores[c] = score
        if not log_scores:
            p = 1.0 / len(classes)
            return {c: p for c in classes}
        peak = max(log_scores.values())
        expd = {c: math.exp(s - peak) for c, s in log_scores.items()}
        norm = sum(expd.values())
        return {c: expd.get(c, 0.0) / norm for c in classes}

    def proba(self, x: np.ndarray, classes, leaf_prediction: str,
              nb_threshold: float = 0.0) -> dict[int, float]:
        if leaf_prediction == "mc" or self.weight_seen < nb_threshold:
            return self.majority_proba(classes)
        if leaf_prediction == "nb":
            return self.naive_bayes_proba(x, classes)
        # nba: whichever predictor has been right more often at this leaf
        if self.nb_correct > self.mc_correct:
            return self.naive_bayes_proba(x, classes)
        return self.majority_proba(classes)

    def learn(self, x: np.ndarray, y: int, weight: float, classes,
              leaf_prediction: str) -> None:
        if leaf_prediction == "nba" and self.weight_seen > 0.0:
            present = [c for c, w in self.class_counts.items() if w > 0.0]
            if len(present) == 1:
                # Both predictors trivially output the lone observed class.
                if present[0] == y:
                    self.mc_correct += weight
                    self.nb_correct += weight
            else:
                mc_pred = argmax_class(self.majority_proba(classes), classes)
                nb_pred = argmax_class(self.naive_bayes_proba(x, classes), classes)
                if mc_pred == y:
                    self.mc_correct += weight
                if nb_pred == y:
                    self.nb_correct += weight
        if self.feature_stats is None:
            self.feature_stats = [{} for _ in range(len(x))]
        self.class_counts[y] = self.class_counts.get(y, 0.0) + weight
        self.weight_seen += weight
        for f in range(len(x)):
            stats = self.feature_stats[f].get(y)
            if stats is None:
                stats = _GaussianStats()
                self.feature_stats[f][y] = stats
            stats.update(float(x[f]), weight)

    def best_split(self, params: "TreeParams", rng: np.random.Generator | None):
        """Return (feature, threshold, left_counts, right_counts) or None."""
        present = [c for c, w in self.class_counts.items() if w > 0.0]
        if len(present) < 2 or self.feature_stats is None:
            return None
        n_features = len(self.feature_stats)
        features = range(n_features)
        if params.max_features is not None and rng is not None:
            size = _resolve_subset_size(params.max_features, n_features)
            if size < n_features:
                features = sorted(rng.choice(n_features, size=size, replace=False))

        # One suggestion per feature (its best threshold) plus the null split;
        # the Hoeffding gap is judged between features, not between thresholds
        # of the same feature.
        suggestions = [(0.0, -1, 0.0, None, None)]  # null split
        for f in features:
            stats_by_class = self.feature_stats[f]
            lo = min((s.lo for s in stats_by_class.values() if s.weight > 0), default=math.inf)
            hi = max((s.hi for s in stats_by_class.values() if s.weight > 0), default=-math.inf)
            if not lo < hi:
                continue
            best_for_feature = None
            for i in range(1, params.n_split_candidates + 1):
                t = lo + (hi - lo) * i / (params.n_split_candidates + 1)
                left: dict[int, float] = {}
                right: dict[int, float] = {}
                for c in present:
                    stats = stats_by_class.get(c)
                    w_c = self.class_counts[c]
                    below = w_c * stats.mass_below(t) if stats is not None else 0.0
                    left[c] = below
                    right[c] = w_c - below
                merit = _split_merit(params.split_criterion, self.class_counts, left, right)
                if best_for_feature is None or merit > best_for_feature[0]:
                    best_for_feature = (merit, f, t, left, right)
            if best_for_feature is not None:
                suggestions.append(best_for_feature)

        suggestions.sort(key=lambda s: (-s[0], s[1], s[2]))
        best = suggestions[0]
        second_merit = suggestions[1][0] if len(suggestions) > 1 else 0.0
        if best[0] <= 0.0:
            return None
        value_range = _merit_range(params.split_criterion, len(present))
        epsilon = hoeffding_bound(value_range, params.split_confidence, self.weight_seen)
        if best[0] - second_merit > epsilon or epsilon < params.tie_threshold:
            return best[1], best[2], best[3], best[4]
        return None


def _resolve_subset_size(max_features, n_features: int) -> int:
    if max_features is None or max_features == "all":
        return n_features
    if max_features == "sqrt":
        return max(1, round(math.sqrt(n_features)))
    if max_features == "log2":
        return max(1, round(math.log2(n_features))) if n_features > 1 else 1
    size = int(math.ceil(float(max_features) * n_features))
    return min(max(1, size), n_features)


class TreeParams:
    """Hyperparameters shared by the tree learners."""

    __slots__ = ("grace_period", "split_criterion", "split_confidence",
                 "tie_threshold", "leaf_prediction", "n_split_candidates",
                 "max_features", "nb_threshold")

    def __init__(self, grace_period=200, split_criterion="info_gini",
                 split_confidence=1e-7, tie_threshold=0.05,
                 leaf_prediction="nba", n_split_candidates=10,
                 max_features=None, nb_threshold=0):
        if split_criterion not in ("gini", "hellinger", "info_gini"):
            raise ValueError(f"unknown split criterion {split_criterion!r}")
        if leaf_prediction not in ("mc", "nb", "nba"):
            raise ValueError(f"unknown leaf prediction {leaf_prediction!r}")
        self.grace_period = grace_period
        self.split_criterion = split_criterion
        self.split_confidence = split_confidence
        self.tie_threshold = tie_threshold
        self.leaf_prediction = leaf_prediction
        self.n_split_candidates = n_split_candidates
        self.max_features = max_features
        self.nb_threshold = nb_threshold


class _SplitNode:
    __slots__ = ("feature", "threshold", "left", "right")

    def __init__(self, feature: int, threshold: float, left, right):
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right

    def route(self, x: np.ndarray):
        return self.left if float(x[self.feature]) <= self.threshold else self.right


def _leaf_for(node, x: np.ndarray) -> _Leaf:
    while not isinstance(node, _Leaf):
        node = node.route(x)
    return node


class HoeffdingTreeClassifier(Classifier):
    """Plain incremental Hoeffding tree over numeric features."""

    def __init__(self, classes, grace_period=200, split_criterion="info_gini",
                 split_confidence=1e-7, tie_threshold=0.05, leaf_prediction="nba",
                 max_features=None, nb_threshold=0, seed=None):
        super().__init__(classes)
        self.params = TreeParams(grace_period, split_criterion, split_confidence,
                                 tie_threshold, leaf_prediction,
                                 max_features=max_features, nb_threshold=nb_threshold)
        self._rng = np.random.default_rng(seed) if max_features is not None else None
        self._root = _Leaf()
        self.n_nodes = 1

    def predict_proba_one(self, x: np.ndarray) -> dict[int, float]:
        return _leaf_for(self._root, x).proba(
            x, self.classes, self.params.leaf_prediction, self.params.nb_threshold
        )

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if weight <= 0.0:
            return
        self._root = self._learn(self._root, x, y, weight)

    def _learn(self, node, x, y, weight):
        if isinstance(node, _Leaf):
            node.learn(x, y, weight, self.classes, self.params.leaf_prediction)
            if node.weight_seen - node.weight_at_last_attempt >= self.params.grace_period:
                node.weight_at_last_attempt = node.weight_seen
                split = node.best_split(self.params, self._rng)
                if split is not None:
                    f, t, left_counts, right_counts = split
                    self.n_nodes += 2
                    return self._make_split(f, t, left_counts, right_counts)
            return node
        child = node.route(x)
        new_child = self._learn(child, x, y, weight)
        if new_child is not child:
            if child is node.left:
                node.left = new_child
            else:
                node.right = new_child
        return node

    def _make_split(self, feature, threshold, left_counts, right_counts):
        return _SplitNode(feature, threshold, _Leaf(left_counts), _Leaf(right_counts))


class _AdaSplitNode(_SplitNode):
    """Split node that monitors its subtree error and grows an alternate."""

    __slots__ = ("adwin", "alternate", "alt_adwin", "weight_seen")

    def __init__(self, feature, threshold, left, right, delta: float):
        super().__init__(feature, threshold, left, right)
        self.adwin = Adwin(delta=delta, check_interval=LEARNER_MONITOR_INTERVAL)
        self.alternate = None
        self.alt_adwin: Adwin | None = None
        self.weight_seen = 0.0


class HoeffdingAdaptiveTreeClassifier(HoeffdingTreeClassifier):
    """Hoeffding tree whose internal nodes replace themselves under drift.

    Each internal node tracks its subtree's 0/1 prediction error with ADWIN at
    ``adwin_confidence``. A detected change (once the node has seen at least
    ``drift_window_threshold`` samples) starts a background alternate subtree.
    The alternate substitutes the original once both error windows hold
    ``drift_window_threshold`` values and the alternate's error is lower by
    more than a normal-approximation bound; it is discarded if it proves
    significantly worse. With ``bootstrap_sampling`` each training sample is
    weighted by a Poisson(1) draw.
    """

    SWAP_CONFIDENCE = 0.05

    def __init__(self, classes, grace_period=200, split_criterion="info_gini",
                 split_confidence=1e-7, tie_threshold=0.05, leaf_prediction="nba",
                 bootstrap_sampling=True, drift_window_threshold=300,
                 adwin_confidence=2e-3, max_features=None, seed=None):
        super().__init__(classes, grace_period, split_criterion, split_confidence,
                         tie_threshold, leaf_prediction, max_features=max_features,
                         seed=seed)
        self.bootstrap_sampling = bootstrap_sampling
        self.drift_window_threshold = drift_window_threshold
        self.adwin_confidence = adwin_confidence
        self._poisson_rng = np.random.default_rng(seed)

    def learn_one(self, x: np.ndarray, y: int, weight: float = 1.0) -> None:
        if self.bootstrap_sampling:
            weight = weight * self._poisson_rng.poisson(1.0)
        if weight <= 0.0:
            return
        self._root = self._learn(self._root, x, y, weight,
                                  self._subtree_prediction(self._root, x))

    def _subtree_prediction(self, node, x) -> int:
        leaf = _leaf_for(node, x)
        return argmax_class(
            leaf.proba(x, self.classes, self.params.leaf_prediction,
                       self.params.nb_threshold),
            self.classes,
        )

    def _make_split(self, feature, threshold, left_counts, right_counts):
        return _AdaSplitNode(feature, threshold, _Leaf(left_counts),
                             _Leaf(right_counts), delta=self.adwin_confidence)

    def _learn(self, node, x, y, weight, subtree_pred=None):
        if isinstance(node, _Leaf):
            return super()._learn(node, x, y, weight)

        assert isinstance(node, _AdaSplitNode)
        # All nodes along one subtree's routing path share the same leaf, so
        # the caller computes the subtree prediction once and passes it down.
        drift = node.adwin.update(0.0 if subtree_pred == y else 1.0)
        node.weight_seen += weight

        if (drift and node.alternate is None
                and node.weight_seen >= self.drift_window_threshold):
            node.alternate = _Leaf()
            node.alt_adwin = Adwin(delta=self.adwin_confidence,
                                   check_interval=LEARNER_MONITOR_INTERVAL)

        if node.alternate is not None:
            alt_pred = self._subtree_prediction(node.alternate, x)
            node.alt_adwin.update(0.0 if alt_pred == y else 1.0)
            node.alternate = self._learn(node.alternate, x, y, weight, alt_pred)
            replacement = self._consider_swap(node)
            if replacement is not None:
                return replacement

        child = node.route(x)
        new_child = self._learn(child, x, y, weight, subtree_pred)
        if new_child is not child:
            if child is node.left:
                node.left = new_child
            else:
                node.right = new_child
        return node

    def _consider_swap(self, node: _AdaSplitNode):
        if (node.alt_adwin.width < self.drift_window_threshold
                or node.adwin.width < self.drift_window_threshold):
            return None
        e_main = node.adwin.mean
        e_alt = node.alt_adwin.mean
        f_n = 1.0 / node.adwin.width + 1.0 / node.alt_adwin.width
        bound = math.sqrt(
            2.0 * e_main * (1.0 - e_main) * math.log(2.0 / self.SWAP_CONFIDENCE) * f_n
        )
        if e_main - e_alt > bound:
            return node.alternate
        if e_alt - e_main > bound:
            node.alternate = None
            node.alt_adwin = None
        return None
