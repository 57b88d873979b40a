"""Shared helpers for the test suite."""

import numpy as np

from driftml.learners.base import Classifier
from driftml.search.space import (
    ComponentConfig,
    ConfigSpace,
    FiniteDomain,
    PipelineGenotype,
    register_classifier_builder,
)
from driftml.streams import DriftSpec, SeaConfig, generate_sea, sea_label


def separable_stream(n, seed, d=1, gap=0.0):
    """Labeled samples split by the sign of the first coordinate."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        x = rng.uniform(-1.0, 1.0, size=d)
        if gap and abs(x[0]) < gap:
            x[0] = gap if x[0] >= 0 else -gap
        out.append((x, 1 if x[0] >= 0.0 else 0))
    return out


def sea_samples(n, seed, concept=1, noise=0.0):
    config = SeaConfig(length=n, seed=seed, noise_rate=noise, initial_concept=concept)
    return [(inst.features, inst.label) for inst in generate_sea(config)]


def sea_abrupt_samples(n, drift_at, seed, noise=0.0, from_concept=3, to_concept=4):
    config = SeaConfig(
        length=n,
        seed=seed,
        noise_rate=noise,
        concept_schedule=(
            DriftSpec(position=drift_at, width=1, from_concept=from_concept,
                      to_concept=to_concept),
        ),
    )
    return [(inst.features, inst.label) for inst in generate_sea(config)]


def prequential_outcomes(model, samples):
    """Test-then-train pass; returns the 0/1 correctness sequence."""
    outcomes = []
    for x, y in samples:
        outcomes.append(1 if model.predict_one(x) == y else 0)
        model.learn_one(x, y)
    return outcomes


def accuracy(outcomes):
    return sum(outcomes) / len(outcomes)


class ConstantWeightRng:
    """Stand-in RNG whose Poisson draws always return a fixed value."""

    def __init__(self, value=1):
        self.value = value

    def poisson(self, lam):
        return self.value

    def random(self):
        return 0.0


class ThresholdOracle(Classifier):
    """Predicts the SEA linear-sum rule directly; perfect when theta matches."""

    def __init__(self, classes, theta):
        super().__init__(classes)
        self.theta = theta

    def predict_proba_one(self, x):
        pred = sea_label(x, self.theta)
        return {c: 1.0 if c == pred else 0.0 for c in self.classes}

    def learn_one(self, x, y, weight=1.0):
        pass


register_classifier_builder(
    "ThresholdOracle", lambda params, classes, seed: ThresholdOracle(classes, **params)
)


def oracle_space(thetas=(7.0, 8.0, 9.0, 9.5)):
    """Search space over the oracle's single hyperparameter."""
    return ConfigSpace(
        classifiers={"ThresholdOracle": {"theta": FiniteDomain(thetas)}},
        preprocessors={},
        classifier_defaults={"ThresholdOracle": {"theta": thetas[0]}},
        preprocessor_defaults={},
        max_preprocessors=0,
    )


def oracle_genotype(theta):
    return PipelineGenotype((), ComponentConfig("ThresholdOracle", {"theta": theta}))


def sea_window(n=600, seed=5, noise=0.0, concept=4):
    config = SeaConfig(length=n, seed=seed, noise_rate=noise, initial_concept=concept)
    return list(generate_sea(config)), config.schema
