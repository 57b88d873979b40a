import numpy as np
import pytest

from driftml.learners.base import Classifier
from driftml.learners.ensembles import (
    AdaptiveRandomForest,
    LeveragingBagging,
    OnlineAdaBoost,
    OzaBagging,
)
from driftml.learners.trees import HoeffdingTreeClassifier
from util import (
    ConstantWeightRng,
    accuracy,
    prequential_outcomes,
    sea_abrupt_samples,
    separable_stream,
)


class RecordingMember(Classifier):
    """Fake member that records the training weights it receives."""

    def __init__(self, classes=(0, 1)):
        super().__init__(classes)
        self.weights = []

    def predict_proba_one(self, x):
        return {self.classes[0]: 1.0, self.classes[1]: 0.0}

    def learn_one(self, x, y, weight=1.0):
        self.weights.append(weight)


class FixedPrediction(Classifier):
    def __init__(self, prediction, classes=(0, 1)):
        super().__init__(classes)
        self.prediction = prediction

    def predict_proba_one(self, x):
        return {c: 1.0 if c == self.prediction else 0.0 for c in self.classes}

    def learn_one(self, x, y, weight=1.0):
        pass


def ht_factory(classes=(0, 1)):
    return lambda: HoeffdingTreeClassifier(classes=classes)


class TestOzaBagging:
    def test_single_member_with_unit_poisson_equals_base(self):
        base = HoeffdingTreeClassifier(classes=(0, 1))
        bag = OzaBagging(classes=(0, 1), base_factory=ht_factory(), n_models=1, seed=0)
        bag._rngs = [ConstantWeightRng(1)]
        samples = separable_stream(2000, seed=1)
        out_bag = prequential_outcomes(bag, samples)
        out_base = prequential_outcomes(base, samples)
        assert out_bag == out_base

    def test_mean_training_weight_is_one(self):
        member = RecordingMember()
        bag = OzaBagging(classes=(0, 1), base_factory=RecordingMember, n_models=1, seed=7)
        bag.members = [member]
        x = np.zeros(1)
        for _ in range(100_000):
            bag.learn_one(x, 0)
        # Zero draws skip learn_one, so add them back as zeros.
        n_calls = len(member.weights)
        mean_weight = sum(member.weights) / 100_000
        assert n_calls < 100_000
        assert 0.99 <= mean_weight <= 1.01

    def test_majority_vote(self):
        bag = OzaBagging(classes=(0, 1), base_factory=RecordingMember, n_models=3, seed=0)
        bag.members = [FixedPrediction(1), FixedPrediction(1), FixedPrediction(0)]
        assert bag.predict_one(np.zeros(1)) == 1

    def test_vote_tie_breaks_low(self):
        bag = OzaBagging(classes=(0, 1), base_factory=RecordingMember, n_models=2, seed=0)
        bag.members = [FixedPrediction(0), FixedPrediction(1)]
        assert bag.predict_one(np.zeros(1)) == 0

    def test_determinism(self):
        samples = separable_stream(1500, seed=2)
        runs = []
        for _ in range(2):
            bag = OzaBagging(classes=(0, 1), base_factory=ht_factory(), n_models=5, seed=11)
            runs.append(prequential_outcomes(bag, samples))
        assert runs[0] == runs[1]


class TestLeveragingBagging:
    def test_default_adwin_delta(self):
        bag = LeveragingBagging(classes=(0, 1), base_factory=ht_factory())
        assert bag.adwin_delta == 0.002

    def test_mean_training_weight_is_six(self):
        member = RecordingMember()
        bag = LeveragingBagging(
            classes=(0, 1), base_factory=RecordingMember, n_models=1, w=1.0, seed=3
        )
        bag.members = [member]
        x = np.zeros(1)
        for _ in range(100_000):
            bag.learn_one(x, 0)
        mean_weight = sum(member.weights) / 100_000
        assert 5.94 <= mean_weight <= 6.06

    def test_w_scales_poisson_mean(self):
        member = RecordingMember()
        bag = LeveragingBagging(
            classes=(0, 1), base_factory=RecordingMember, n_models=1, w=2.0, seed=4
        )
        bag.members = [member]
        x = np.zeros(1)
        for _ in range(50_000):
            bag.learn_one(x, 0)
        assert sum(member.weights) / 50_000 == pytest.approx(12.0, abs=0.15)

    def test_unsupported_method_rejected(self):
        with pytest.raises(ValueError, match="bagging_method"):
            LeveragingBagging(classes=(0, 1), base_factory=ht_factory(),
                              bagging_method="bogus")

    @pytest.mark.parametrize("method", ["bag", "me", "half", "wt", "subag"])
    def test_all_methods_learn(self, method):
        bag = LeveragingBagging(
            classes=(0, 1), base_factory=ht_factory(), n_models=3,
            bagging_method=method, seed=5,
        )
        samples = separable_stream(1200, seed=6)
        outcomes = prequential_outcomes(bag, samples)
        assert accuracy(outcomes[-300:]) > 0.8

    @pytest.mark.slow
    def test_at_least_as_good_as_base(self):
        samples = separable_stream(4000, seed=8)
        base_acc = accuracy(prequential_outcomes(
            HoeffdingTreeClassifier(classes=(0, 1)), samples))
        bag = LeveragingBagging(classes=(0, 1), base_factory=ht_factory(), n_models=10, seed=9)
        bag_acc = accuracy(prequential_outcomes(bag, samples))
        assert bag_acc >= base_acc - 0.02


class TestOnlineAdaBoost:
    def test_single_member_is_poisson_weighted_base(self):
        boost = OnlineAdaBoost(classes=(0, 1), base_factory=ht_factory(), n_models=1, seed=42)
        manual_rng = np.random.default_rng(np.random.SeedSequence(42).spawn(1)[0])
        manual_base = HoeffdingTreeClassifier(classes=(0, 1))
        samples = separable_stream(2000, seed=10)
        boost_preds = []
        manual_preds = []
        for x, y in samples:
            boost_preds.append(boost.predict_one(x))
            manual_preds.append(manual_base.predict_one(x))
            boost.learn_one(x, y)
            k = float(manual_rng.poisson(1.0))
            if k > 0:
                manual_base.learn_one(x, y, k)
        assert boost_preds == manual_preds

    def test_vote_weight_vanishes_at_half_error(self):
        boost = OnlineAdaBoost(classes=(0, 1), base_factory=ht_factory(), n_models=2, seed=0)
        boost._correct_weight[0] = 50.0
        boost._wrong_weight[0] = 50.0
        assert boost.member_vote_weight(0) == 0.0
        boost._correct_weight[1] = 99.0
        boost._wrong_weight[1] = 1.0
        assert boost.member_vote_weight(1) > 4.0

    def test_vote_weight_shrinks_toward_half(self):
        boost = OnlineAdaBoost(classes=(0, 1), base_factory=ht_factory(), n_models=1, seed=0)
        weights = []
        for wrong in (10.0, 30.0, 49.0, 49.9):
            boost._correct_weight[0] = 100.0 - wrong
            boost._wrong_weight[0] = wrong
            weights.append(boost.member_vote_weight(0))
        assert all(a > b for a, b in zip(weights, weights[1:]))
        assert weights[-1] < 0.01

    @pytest.mark.slow
    def test_at_least_as_good_as_base(self):
        samples = separable_stream(4000, seed=11)
        base_acc = accuracy(prequential_outcomes(
            HoeffdingTreeClassifier(classes=(0, 1)), samples))
        boost = OnlineAdaBoost(classes=(0, 1), base_factory=ht_factory(), n_models=5, seed=12)
        boost_acc = accuracy(prequential_outcomes(boost, samples))
        assert boost_acc >= base_acc - 0.02


class TestAdaptiveRandomForest:
    def test_defaults(self):
        arf = AdaptiveRandomForest(classes=(0, 1))
        assert arf.n_models == 10
        assert arf.lambda_value == 6.0
        assert arf.max_features == "sqrt"
        assert arf._tree_kwargs["grace_period"] == 50
        assert arf._tree_kwargs["split_confidence"] == 1e-2

    def test_full_feature_fraction_disables_subspace_randomness(self):
        # With max_features=1.0 every split sees all features, so trees with
        # different seeds trained identically end up structurally identical.
        samples = separable_stream(3000, seed=13)
        t1 = HoeffdingTreeClassifier(classes=(0, 1), max_features=1.0, seed=1)
        t2 = HoeffdingTreeClassifier(classes=(0, 1), max_features=1.0, seed=999)
        for x, y in samples:
            t1.learn_one(x, y)
            t2.learn_one(x, y)
        test = separable_stream(500, seed=14)
        assert [t1.predict_one(x) for x, _ in test] == [t2.predict_one(x) for x, _ in test]

    def test_identical_members_with_constant_weights(self):
        arf = AdaptiveRandomForest(classes=(0, 1), n_models=4, max_features=1.0, seed=2)
        arf._rngs = [ConstantWeightRng(1) for _ in range(4)]
        samples = separable_stream(1500, seed=15)
        prequential_outcomes(arf, samples)
        test = separable_stream(300, seed=16)
        for x, _ in test:
            preds = {m.predict_one(x) for m in arf.members}
            assert len(preds) == 1

    def test_learns_separable_stream(self):
        arf = AdaptiveRandomForest(classes=(0, 1), n_models=5, seed=3)
        samples = separable_stream(2500, seed=17, d=3)
        outcomes = prequential_outcomes(arf, samples)
        assert accuracy(outcomes[-500:]) > 0.9

    @pytest.mark.slow
    def test_recovers_after_abrupt_drift(self):
        samples = sea_abrupt_samples(14000, drift_at=8000, seed=18, noise=0.10)
        arf = AdaptiveRandomForest(classes=(0, 1), n_models=5, seed=4)
        outcomes = prequential_outcomes(arf, samples)
        pre = accuracy(outcomes[5000:8000])
        post = accuracy(outcomes[11000:13000])
        assert post >= pre - 0.03

    def test_determinism(self):
        samples = separable_stream(1200, seed=19)
        runs = []
        for _ in range(2):
            arf = AdaptiveRandomForest(classes=(0, 1), n_models=3, seed=20)
            runs.append(prequential_outcomes(arf, samples))
        assert runs[0] == runs[1]
