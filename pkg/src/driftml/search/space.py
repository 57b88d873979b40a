"""Pipeline configuration space: domains, genotypes, sampling, variation.

A genotype is 0-2 preprocessor configs followed by exactly one classifier
config, every hyperparameter inside its declared domain. The default space
covers the adaptive online classifiers (HAT, ARF, leveraging/Oza bagging,
online AdaBoost over four base learners) and the online preprocessors, each
with its searchable hyperparameter grid and default assignment.

Custom classifier or preprocessor kinds can be added via the builder
registries, which is also how tests plant synthetic candidates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

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
)
from driftml.pipeline import OnlinePipeline
from driftml.preprocessing import (
    AdaptiveStandardScaler,
    Binarizer,
    MaxAbsScaler,
    MinMaxScaler,
    Normalizer,
    PolynomialExtender,
    RobustScaler,
    StandardScaler,
)
from driftml.streams import StreamSchema


@dataclass(frozen=True)
class FiniteDomain:
    values: tuple

    def contains(self, value) -> bool:
        return any(value == v and type(value) is type(v) or value == v for v in self.values)

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(0, len(self.values)))]

    def perturb(self, value, rng: np.random.Generator):
        others = [v for v in self.values if v != value]
        if not others:
            return value
        return others[int(rng.integers(0, len(others)))]

    def describe(self) -> str:
        return "{" + ", ".join(map(str, self.values)) + "}"


@dataclass(frozen=True)
class IntRange:
    lo: int
    hi: int  # inclusive

    def contains(self, value) -> bool:
        return isinstance(value, (int, np.integer)) and self.lo <= value <= self.hi

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.lo, self.hi + 1))

    def perturb(self, value, rng: np.random.Generator) -> int:
        if self.lo == self.hi:
            return self.lo
        new = self.sample(rng)
        while new == value:
            new = self.sample(rng)
        return new

    def describe(self) -> str:
        return f"[{self.lo} - {self.hi}]"


@dataclass(frozen=True)
class FloatRange:
    lo: float
    hi: float

    def contains(self, value) -> bool:
        return isinstance(value, (int, float, np.floating)) and self.lo <= value <= self.hi

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))

    def perturb(self, value, rng: np.random.Generator) -> float:
        return self.sample(rng)

    def describe(self) -> str:
        return f"[{self.lo} - {self.hi}]"


@dataclass
class ComponentConfig:
    """One pipeline component: a kind plus a full hyperparameter assignment."""

    kind: str
    params: dict

    def describe(self) -> str:
        if not self.params:
            return self.kind
        inner = ",".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"{self.kind}({inner})"


@dataclass
class PipelineGenotype:
    preprocessors: tuple[ComponentConfig, ...]
    classifier: ComponentConfig
    provenance: str = "random"

    def describe(self) -> str:
        parts = [p.describe() for p in self.preprocessors] + [self.classifier.describe()]
        return " > ".join(parts)


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


_TIE_THRESHOLDS = FiniteDomain((0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08))
_LEAF_PREDICTIONS = FiniteDomain(("mc", "nb", "nba"))
_BASE_MODELS = FiniteDomain(
    ("LogisticRegression", "KNNClassifier", "Perceptron", "HoeffdingTree")
)

DEFAULT_CLASSIFIER_DOMAINS: dict[str, dict] = {
    "HAT": {
        "grace_period": IntRange(50, 350),
        "split_criterion": FiniteDomain(("gini", "hellinger", "info_gini")),
        "split_confidence": FiniteDomain((1e-2, 1e-4, 1e-7, 1e-9)),
        "tie_threshold": _TIE_THRESHOLDS,
        "leaf_prediction": _LEAF_PREDICTIONS,
        "bootstrap_sampling": FiniteDomain((True, False)),
        "drift_window_threshold": FiniteDomain((100, 200, 300, 400, 500)),
        "adwin_confidence": FiniteDomain((2e-4, 2e-3, 2e-2)),
    },
    "ARF": {
        "n_models": IntRange(1, 20),
        "max_features": FiniteDomain((0.2, 0.5, 0.7, 1.0, "sqrt", "log2", None)),
        "lambda_value": FloatRange(2.0, 10.0),
        "grace_period": IntRange(50, 350),
        "split_confidence": FiniteDomain((1e-9, 1e-7, 1e-4, 1e-2)),
        "tie_threshold": _TIE_THRESHOLDS,
        "leaf_prediction": _LEAF_PREDICTIONS,
        "nb_threshold": FiniteDomain((0, 10, 20, 30, 40, 50)),
    },
    "LeveragingBagging": {
        "model": _BASE_MODELS,
        "n_models": IntRange(1, 20),
        "w": FloatRange(1.0, 10.0),
        "adwin_delta": FiniteDomain((0.001, 0.002, 0.005, 0.01)),
        "bagging_method": FiniteDomain(("bag", "me", "half", "wt", "subag")),
    },
    "OzaBagging": {
        "model": _BASE_MODELS,
        "n_models": IntRange(1, 20),
    },
    "OnlineAdaBoost": {
        "model": _BASE_MODELS,
        "n_models": IntRange(1, 20),
    },
}

DEFAULT_CLASSIFIER_DEFAULTS: dict[str, dict] = {
    "HAT": {
        "grace_period": 200,
        "split_criterion": "info_gini",
        "split_confidence": 1e-7,
        "tie_threshold": 0.05,
        "leaf_prediction": "nba",
        "bootstrap_sampling": True,
        "drift_window_threshold": 300,
        "adwin_confidence": 2e-3,
    },
    "ARF": {
        "n_models": 10,
        "max_features": "sqrt",
        "lambda_value": 6.0,
        "grace_period": 50,
        "split_confidence": 1e-2,
        "tie_threshold": 0.05,
        "leaf_prediction": "nba",
        "nb_threshold": 0,
    },
    "LeveragingBagging": {
        "model": "HoeffdingTree",
        "n_models": 10,
        "w": 1.0,
        "adwin_delta": 0.002,
        "bagging_method": "bag",
    },
    "OzaBagging": {"model": "HoeffdingTree", "n_models": 10},
    "OnlineAdaBoost": {"model": "HoeffdingTree", "n_models": 10},
}

DEFAULT_PREPROCESSOR_DOMAINS: dict[str, dict] = {
    "StandardScaler": {},
    "AdaptiveStandardScaler": {},
    "MaxAbsScaler": {},
    "MinMaxScaler": {},
    "RobustScaler": {
        "with_centering": FiniteDomain((True, False)),
        "with_scaling": FiniteDomain((True, False)),
        "q_inf": FiniteDomain(_grid(0.0, 1.0, 0.05)),
        "q_sup": FiniteDomain(_grid(0.0, 1.0, 0.05)),
    },
    "Normalizer": {"order": FiniteDomain(("L1", "L2"))},
    "Binarizer": {"threshold": FiniteDomain(_grid(0.0, 1.0, 0.05))},
    "PolynomialExtender": {
        "degree": FiniteDomain((2, 3)),
        "interaction_only": FiniteDomain((True, False)),
        "include_bias": FiniteDomain((True, False)),
    },
}

DEFAULT_PREPROCESSOR_DEFAULTS: dict[str, dict] = {
    "StandardScaler": {},
    "AdaptiveStandardScaler": {},
    "MaxAbsScaler": {},
    "MinMaxScaler": {},
    "RobustScaler": {
        "with_centering": True,
        "with_scaling": True,
        "q_inf": 0.25,
        "q_sup": 0.75,
    },
    "Normalizer": {"order": "L2"},
    "Binarizer": {"threshold": 0.0},
    "PolynomialExtender": {
        "degree": 2,
        "interaction_only": False,
        "include_bias": False,
    },
}


class ConfigSpace:
    """Searchable domains for every component, plus sampling and variation."""

    def __init__(self, classifiers=None, preprocessors=None,
                 classifier_defaults=None, preprocessor_defaults=None,
                 max_preprocessors: int = 2):
        self.classifiers = classifiers if classifiers is not None else {
            k: dict(v) for k, v in DEFAULT_CLASSIFIER_DOMAINS.items()
        }
        self.preprocessors = preprocessors if preprocessors is not None else {
            k: dict(v) for k, v in DEFAULT_PREPROCESSOR_DOMAINS.items()
        }
        self.classifier_defaults = classifier_defaults or {
            k: dict(v) for k, v in DEFAULT_CLASSIFIER_DEFAULTS.items()
        }
        self.preprocessor_defaults = preprocessor_defaults or {
            k: dict(v) for k, v in DEFAULT_PREPROCESSOR_DEFAULTS.items()
        }
        self.max_preprocessors = max_preprocessors

    # -- lookup ------------------------------------------------------------

    def _domains_for(self, kind: str) -> dict:
        if kind in self.classifiers:
            return self.classifiers[kind]
        if kind in self.preprocessors:
            return self.preprocessors[kind]
        raise KeyError(f"unknown component kind {kind!r}")

    def default_classifier(self, kind: str | None = None) -> ComponentConfig:
        if kind is None:
            kind = "HAT" if "HAT" in self.classifier_defaults else sorted(self.classifier_defaults)[0]
        return ComponentConfig(kind, dict(self.classifier_defaults[kind]))

    def check_pin(self, kind: str, param: str, value):
        """Return a violation message if (kind, param, value) is outside the
        space, else None."""
        try:
            domains = self._domains_for(kind)
        except KeyError:
            return f"unknown component {kind!r}"
        if param not in domains:
            return f"{kind} has no hyperparameter {param!r}"
        domain = domains[param]
        if not domain.contains(value):
            return f"{kind}.{param}={value!r} outside search range {domain.describe()}"
        return None

    def pin(self, kind: str, param: str, value) -> None:
        """Collapse a domain to a single user-chosen value (must be in range)."""
        violation = self.check_pin(kind, param, value)
        if violation:
            raise ValueError(violation)
        self._domains_for(kind)[param] = FiniteDomain((value,))

    # -- sampling ----------------------------------------------------------

    def _sample_component(self, kind: str, domains: dict, rng) -> ComponentConfig:
        return ComponentConfig(kind, {p: d.sample(rng) for p, d in sorted(domains.items())})

    def sample_classifier(self, rng: np.random.Generator) -> ComponentConfig:
        kinds = sorted(self.classifiers)
        kind = kinds[int(rng.integers(0, len(kinds)))]
        return self._sample_component(kind, self.classifiers[kind], rng)

    def sample_preprocessor(self, rng: np.random.Generator) -> ComponentConfig:
        kinds = sorted(self.preprocessors)
        kind = kinds[int(rng.integers(0, len(kinds)))]
        return self._sample_component(kind, self.preprocessors[kind], rng)

    def sample(self, rng: np.random.Generator) -> PipelineGenotype:
        limit = self.max_preprocessors if self.preprocessors else 0
        n_pre = int(rng.integers(0, limit + 1)) if limit else 0
        pres = tuple(self.sample_preprocessor(rng) for _ in range(n_pre))
        return PipelineGenotype(pres, self.sample_classifier(rng), provenance="random")

    # -- validation ----------------------------------------------------------

    def violations(self, genotype: PipelineGenotype) -> list[str]:
        problems = []
        if len(genotype.preprocessors) > self.max_preprocessors:
            problems.append(
                f"{len(genotype.preprocessors)} preprocessors exceed the limit "
                f"of {self.max_preprocessors}"
            )
        for component, table in (
            [(genotype.classifier, self.classifiers)]
            + [(p, self.preprocessors) for p in genotype.preprocessors]
        ):
            if component.kind not in table:
                problems.append(f"unknown component {component.kind!r}")
                continue
            domains = table[component.kind]
            for param, value in component.params.items():
                if param not in domains:
                    problems.append(f"{component.kind} has no hyperparameter {param!r}")
                elif not domains[param].contains(value):
                    problems.append(
                        f"{component.kind}.{param}={value!r} outside "
                        f"{domains[param].describe()}"
                    )
            for param in domains:
                if param not in component.params:
                    problems.append(f"{component.kind} missing hyperparameter {param!r}")
        return problems

    def is_valid(self, genotype: PipelineGenotype) -> bool:
        return not self.violations(genotype)

    # -- variation -----------------------------------------------------------

    def mutate(self, genotype: PipelineGenotype, rng: np.random.Generator) -> PipelineGenotype:
        """One of: perturb a hyperparameter, replace the classifier, or edit
        the preprocessor list; always returns a valid genotype."""
        can_edit_pres = bool(self.preprocessors) and self.max_preprocessors > 0
        op = int(rng.integers(0, 3 if can_edit_pres else 2))
        if op == 0:
            mutated = self._perturb_hyperparameter(genotype, rng)
            if mutated is not None:
                return mutated
            op = 1  # no tunable hyperparameter anywhere: fall through
        if op == 1:
            return self._replace_classifier(genotype, rng)
        return self._edit_preprocessors(genotype, rng)

    def _perturb_hyperparameter(self, genotype, rng):
        slots = []
        components = [("clf", -1, genotype.classifier)] + [
            ("pre", i, p) for i, p in enumerate(genotype.preprocessors)
        ]
        for role, idx, comp in components:
            domains = self._domains_for(comp.kind)
            for param, domain in sorted(domains.items()):
                if isinstance(domain, FiniteDomain) and len(domain.values) < 2:
                    continue
                slots.append((role, idx, comp, param, domain))
        if not slots:
            return None
        role, idx, comp, param, domain = slots[int(rng.integers(0, len(slots)))]
        new_params = dict(comp.params)
        new_params[param] = domain.perturb(comp.params[param], rng)
        new_comp = ComponentConfig(comp.kind, new_params)
        if role == "clf":
            return PipelineGenotype(genotype.preprocessors, new_comp, provenance="mutation")
        pres = list(genotype.preprocessors)
        pres[idx] = new_comp
        return PipelineGenotype(tuple(pres), genotype.classifier, provenance="mutation")

    def _replace_classifier(self, genotype, rng):
        kinds = sorted(self.classifiers)
        others = [k for k in kinds if k != genotype.classifier.kind]
        kind = (others[int(rng.integers(0, len(others)))] if others
                else genotype.classifier.kind)
        new_clf = self._sample_component(kind, self.classifiers[kind], rng)
        return PipelineGenotype(genotype.preprocessors, new_clf, provenance="mutation")

    def _edit_preprocessors(self, genotype, rng):
        pres = list(genotype.preprocessors)
        ops = ["insert", "remove", "replace"]
        if not pres:
            ops = ["insert"]
        elif len(pres) >= self.max_preprocessors:
            ops = ["remove", "replace"]
        op = ops[int(rng.integers(0, len(ops)))]
        if op == "insert":
            pos = int(rng.integers(0, len(pres) + 1))
            pres.insert(pos, self.sample_preprocessor(rng))
        elif op == "remove":
            pres.pop(int(rng.integers(0, len(pres))))
        else:
            pres[int(rng.integers(0, len(pres)))] = self.sample_preprocessor(rng)
        return PipelineGenotype(tuple(pres), genotype.classifier, provenance="mutation")

    def crossover(self, a: PipelineGenotype, b: PipelineGenotype,
                  rng: np.random.Generator) -> PipelineGenotype:
        """Splice preprocessor lists at one shared cut point and mix the
        classifier (per-hyperparameter when both parents share its kind)."""
        cut = int(rng.integers(0, self.max_preprocessors + 1))
        pres = tuple(a.preprocessors[:cut]) + tuple(b.preprocessors[cut:])
        pres = pres[: self.max_preprocessors]
        if a.classifier.kind == b.classifier.kind:
            params = {}
            for param in a.classifier.params:
                take_a = bool(rng.integers(0, 2))
                params[param] = a.classifier.params[param] if take_a else \
                    b.classifier.params[param]
            clf = ComponentConfig(a.classifier.kind, params)
        else:
            clf = a.classifier if rng.integers(0, 2) == 0 else b.classifier
            clf = ComponentConfig(clf.kind, dict(clf.params))
        return PipelineGenotype(pres, clf, provenance="crossover")


# -- builders ----------------------------------------------------------------

BASE_MODEL_FACTORIES: dict[str, Callable] = {
    "LogisticRegression": lambda classes: LogisticRegression(classes),
    "KNNClassifier": lambda classes: KNNClassifier(classes),
    "Perceptron": lambda classes: Perceptron(classes),
    "HoeffdingTree": lambda classes: HoeffdingTreeClassifier(classes),
}


def _base_factory(name: str, classes):
    factory = BASE_MODEL_FACTORIES[name]
    return lambda: factory(classes)


def _build_hat(params, classes, seed):
    return HoeffdingAdaptiveTreeClassifier(classes, seed=seed, **params)


def _build_arf(params, classes, seed):
    return AdaptiveRandomForest(classes, seed=seed, **params)


def _build_leveraging(params, classes, seed):
    params = dict(params)
    base = _base_factory(params.pop("model"), classes)
    return LeveragingBagging(classes, base_factory=base, seed=seed, **params)


def _build_oza(params, classes, seed):
    params = dict(params)
    base = _base_factory(params.pop("model"), classes)
    return OzaBagging(classes, base_factory=base, seed=seed, **params)


def _build_adaboost(params, classes, seed):
    params = dict(params)
    base = _base_factory(params.pop("model"), classes)
    return OnlineAdaBoost(classes, base_factory=base, seed=seed, **params)


CLASSIFIER_BUILDERS: dict[str, Callable] = {
    "HAT": _build_hat,
    "ARF": _build_arf,
    "LeveragingBagging": _build_leveraging,
    "OzaBagging": _build_oza,
    "OnlineAdaBoost": _build_adaboost,
}

PREPROCESSOR_BUILDERS: dict[str, Callable] = {
    "StandardScaler": lambda params: StandardScaler(),
    "AdaptiveStandardScaler": lambda params: AdaptiveStandardScaler(),
    "MaxAbsScaler": lambda params: MaxAbsScaler(),
    "MinMaxScaler": lambda params: MinMaxScaler(),
    "RobustScaler": lambda params: RobustScaler(**params),
    "Normalizer": lambda params: Normalizer(**params),
    "Binarizer": lambda params: Binarizer(**params),
    "PolynomialExtender": lambda params: PolynomialExtender(**params),
}


def register_classifier_builder(kind: str, builder: Callable) -> None:
    """Add or override a classifier builder (signature: params, classes, seed)."""
    CLASSIFIER_BUILDERS[kind] = builder


def register_preprocessor_builder(kind: str, builder: Callable) -> None:
    PREPROCESSOR_BUILDERS[kind] = builder


def build_pipeline(genotype: PipelineGenotype, schema: StreamSchema,
                   seed=None) -> OnlinePipeline:
    """Instantiate a fresh, untrained pipeline from a genotype."""
    preps = []
    for comp in genotype.preprocessors:
        try:
            preps.append(PREPROCESSOR_BUILDERS[comp.kind](dict(comp.params)))
        except KeyError:
            raise ValueError(f"no builder for preprocessor {comp.kind!r}") from None
    clf_conf = genotype.classifier
    try:
        builder = CLASSIFIER_BUILDERS[clf_conf.kind]
    except KeyError:
        raise ValueError(f"no builder for classifier {clf_conf.kind!r}") from None
    classifier = builder(dict(clf_conf.params), schema.class_labels, seed)
    return OnlinePipeline(preps, classifier, descriptor=genotype.describe())
