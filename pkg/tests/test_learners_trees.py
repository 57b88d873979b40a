import math

import numpy as np
import pytest

from driftml.learners.trees import (
    HoeffdingAdaptiveTreeClassifier,
    HoeffdingTreeClassifier,
    _Leaf,
    hoeffding_bound,
)
from util import accuracy, prequential_outcomes, sea_abrupt_samples, separable_stream


class TestHoeffdingBound:
    def test_closed_form_value(self):
        eps = hoeffding_bound(1.0, 1e-7, 200)
        assert eps == pytest.approx(math.sqrt(math.log(1e7) / 400.0))
        assert eps == pytest.approx(0.2007, abs=5e-4)

    def test_quadrupling_n_halves_epsilon(self):
        assert hoeffding_bound(1.0, 0.01, 400) == pytest.approx(
            hoeffding_bound(1.0, 0.01, 100) / 2.0
        )

    def test_monotone_in_n(self):
        values = [hoeffding_bound(2.0, 1e-4, n) for n in range(1, 500, 7)]
        assert all(a > b for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(value_range=1.0, delta=1.0, n=10),
            dict(value_range=1.0, delta=0.0, n=10),
            dict(value_range=1.0, delta=0.5, n=0),
            dict(value_range=0.0, delta=0.5, n=10),
        ],
    )
    def test_domain_violations(self, kwargs):
        with pytest.raises(ValueError):
            hoeffding_bound(**kwargs)


class TestHoeffdingTree:
    def test_single_leaf_majority_before_grace_period(self):
        tree = HoeffdingTreeClassifier(classes=(0, 1), grace_period=200)
        rng = np.random.default_rng(0)
        for _ in range(150):
            tree.learn_one(rng.random(2), 1)
        for _ in range(40):
            tree.learn_one(rng.random(2), 0)
        assert tree.n_nodes == 1
        assert tree.predict_one(rng.random(2)) == 1

    def test_constant_label_stream_never_splits(self):
        tree = HoeffdingTreeClassifier(classes=(0, 1), grace_period=50)
        rng = np.random.default_rng(1)
        for _ in range(5000):
            tree.learn_one(rng.random(3), 1)
        assert tree.n_nodes == 1

    @pytest.mark.parametrize("criterion", ["info_gini", "gini", "hellinger"])
    def test_learns_separable_stream(self, criterion):
        tree = HoeffdingTreeClassifier(classes=(0, 1), split_criterion=criterion)
        train = separable_stream(5000, seed=2)
        test = separable_stream(1000, seed=3)
        for x, y in train:
            tree.learn_one(x, y)
        acc = accuracy([1 if tree.predict_one(x) == y else 0 for x, y in test])
        assert acc >= 0.95
        assert tree.n_nodes > 1

    def test_proba_is_distribution(self):
        tree = HoeffdingTreeClassifier(classes=(0, 1, 2))
        rng = np.random.default_rng(4)
        for _ in range(500):
            x = rng.random(2)
            proba = tree.predict_proba_one(x)
            assert sum(proba.values()) == pytest.approx(1.0, abs=1e-9)
            tree.learn_one(x, int(rng.integers(0, 3)))

    def test_fresh_tree_prediction_ties_to_lowest_class(self):
        tree = HoeffdingTreeClassifier(classes=(3, 7))
        assert tree.predict_one(np.array([0.5])) == 3

    def test_leaf_prediction_modes(self):
        for mode in ("mc", "nb", "nba"):
            tree = HoeffdingTreeClassifier(classes=(0, 1), leaf_prediction=mode)
            for x, y in separable_stream(2000, seed=5):
                tree.learn_one(x, y)
            test = separable_stream(300, seed=6)
            acc = accuracy([1 if tree.predict_one(x) == y else 0 for x, y in test])
            assert acc >= 0.9

    def test_weighted_updates_match_repetition(self):
        # Statistics under one weight-2 update equal two weight-1 updates
        # (compare below any split/grace boundary, mc mode).
        a = HoeffdingTreeClassifier(classes=(0, 1), grace_period=10**6, leaf_prediction="mc")
        b = HoeffdingTreeClassifier(classes=(0, 1), grace_period=10**6, leaf_prediction="mc")
        samples = separable_stream(400, seed=7)
        for x, y in samples:
            a.learn_one(x, y, weight=2.0)
            b.learn_one(x, y)
            b.learn_one(x, y)
        assert a._root.class_counts == b._root.class_counts
        for f in range(1):
            for c in (0, 1):
                sa = a._root.feature_stats[f][c]
                sb = b._root.feature_stats[f][c]
                assert sa.weight == sb.weight
                assert sa.mean == pytest.approx(sb.mean)
                assert sa.m2 == pytest.approx(sb.m2)


class TestHoeffdingAdaptiveTree:
    def test_default_hyperparameters(self):
        tree = HoeffdingAdaptiveTreeClassifier(classes=(0, 1))
        assert tree.params.grace_period == 200
        assert tree.params.split_confidence == 1e-7
        assert tree.params.tie_threshold == 0.05
        assert tree.params.leaf_prediction == "nba"
        assert tree.bootstrap_sampling is True
        assert tree.drift_window_threshold == 300
        assert tree.adwin_confidence == 2e-3

    def test_disabled_detector_matches_plain_tree(self):
        kwargs = dict(grace_period=100, split_criterion="info_gini",
                      split_confidence=1e-4, tie_threshold=0.05,
                      leaf_prediction="mc")
        plain = HoeffdingTreeClassifier(classes=(0, 1), **kwargs)
        hat = HoeffdingAdaptiveTreeClassifier(
            classes=(0, 1), bootstrap_sampling=False, adwin_confidence=1e-15, **kwargs
        )
        samples = separable_stream(3000, seed=9)
        preds_plain = prequential_outcomes(plain, samples)
        preds_hat = prequential_outcomes(hat, samples)
        assert preds_plain == preds_hat

    @pytest.mark.slow
    def test_recovers_after_abrupt_drift(self):
        samples = sea_abrupt_samples(15000, drift_at=10000, seed=23, noise=0.10)
        tree = HoeffdingAdaptiveTreeClassifier(classes=(0, 1), seed=3)
        outcomes = prequential_outcomes(tree, samples)
        pre = accuracy(outcomes[7000:10000])
        post = accuracy(outcomes[12000:15000])
        assert post >= pre - 0.03

    def test_poisson_weighting_changes_training(self):
        a = HoeffdingAdaptiveTreeClassifier(classes=(0, 1), bootstrap_sampling=True, seed=1)
        b = HoeffdingAdaptiveTreeClassifier(classes=(0, 1), bootstrap_sampling=False, seed=1)
        samples = separable_stream(1500, seed=12)
        out_a = prequential_outcomes(a, samples)
        out_b = prequential_outcomes(b, samples)
        assert accuracy(out_a[500:]) > 0.8 and accuracy(out_b[500:]) > 0.8

    def test_determinism_with_seed(self):
        samples = sea_abrupt_samples(3000, drift_at=1500, seed=13)
        runs = []
        for _ in range(2):
            tree = HoeffdingAdaptiveTreeClassifier(classes=(0, 1), seed=21)
            runs.append(prequential_outcomes(tree, samples))
        assert runs[0] == runs[1]


class TestLeafInternals:
    def test_empty_leaf_uniform(self):
        leaf = _Leaf()
        proba = leaf.proba(np.array([1.0]), (0, 1), "mc")
        assert proba == {0: 0.5, 1: 0.5}

    def test_majority_tie_breaks_low(self):
        leaf = _Leaf({0: 5.0, 1: 5.0})
        from driftml.learners.base import argmax_class

        assert argmax_class(leaf.majority_proba((0, 1)), (0, 1)) == 0
