"""Data streams: sample model, synthetic drift generators, CSV ingestion.

Streams are plain Python generators yielding :class:`Instance` one at a time,
so memory stays constant regardless of stream length. Generated streams are
bitwise reproducible for a fixed config (seed included).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence

import numpy as np


class SchemaError(ValueError):
    """Raised when stream data does not match its declared schema."""


@dataclass(eq=False)
class Instance:
    """One timestamped sample: feature vector plus optional class label."""

    index: int
    features: np.ndarray
    label: Optional[int] = None


@dataclass(frozen=True)
class StreamSchema:
    """Shape contract of a stream: dimensionality and the class-label set."""

    n_features: int
    class_labels: tuple[int, ...]
    feature_names: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        if self.n_features < 1:
            raise ValueError("n_features must be >= 1")
        if len(self.class_labels) < 2:
            raise ValueError("need at least two class labels")
        object.__setattr__(self, "class_labels", tuple(sorted(self.class_labels)))


@dataclass(frozen=True)
class DriftSpec:
    """One concept transition: centered at ``position``, spread over ``width`` samples.

    ``width == 1`` is an abrupt switch: samples before ``position`` come from
    ``from_concept``, samples at or after it from ``to_concept``.
    """

    position: int
    width: int
    from_concept: int
    to_concept: int

    def __post_init__(self) -> None:
        if self.position <= 0:
            raise ValueError("drift position must be > 0")
        if self.width < 1:
            raise ValueError("drift width must be >= 1")


# Threshold of the linear rule for each SEA concept; 3 -> 4 is the
# largest-separation pair and is used for high-magnitude abrupt drift.
SEA_THRESHOLDS: dict[int, float] = {1: 8.0, 2: 9.0, 3: 7.0, 4: 9.5}


@dataclass(frozen=True)
class SeaConfig:
    """Config for the SEA generator (3 uniform features, thresholded-sum label)."""

    length: int
    seed: int
    concept_schedule: tuple[DriftSpec, ...] = ()
    noise_rate: float = 0.0
    initial_concept: int = 1

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("length must be positive")
        if not 0.0 <= self.noise_rate < 0.5:
            raise ValueError("noise_rate must lie in [0, 0.5); labels become uninformative beyond")
        positions = [d.position for d in self.concept_schedule]
        if any(b <= a for a, b in zip(positions, positions[1:])):
            raise ValueError("drift positions must be strictly increasing")
        if any(p >= self.length for p in positions):
            raise ValueError("drift positions must be < length")
        for d in self.concept_schedule:
            for c in (d.from_concept, d.to_concept):
                if c not in SEA_THRESHOLDS:
                    raise ValueError(f"unknown SEA concept {c}")
        if self.initial_concept not in SEA_THRESHOLDS:
            raise ValueError(f"unknown SEA concept {self.initial_concept}")

    @property
    def schema(self) -> StreamSchema:
        return StreamSchema(n_features=3, class_labels=(0, 1))


@dataclass(frozen=True)
class HyperplaneConfig:
    """Config for the rotating-hyperplane generator.

    Every weight moves by ``direction * mag_change`` per sample and each
    direction reverses independently with probability ``sigma`` per sample,
    so the class boundary rotates continuously (gradual drift). The label is
    1 iff the weighted feature sum exceeds half the weight total.
    """

    length: int
    seed: int
    n_features: int = 10
    mag_change: float = 0.001
    sigma: float = 0.1
    noise_rate: float = 0.0

    def __post_init__(self) -> None:
        if self.length <= 0:
            raise ValueError("length must be positive")
        if self.n_features < 2:
            raise ValueError("n_features must be >= 2")
        if self.mag_change < 0:
            raise ValueError("mag_change must be >= 0")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError("sigma must lie in [0, 1]")
        if not 0.0 <= self.noise_rate < 0.5:
            raise ValueError("noise_rate must lie in [0, 0.5)")

    @property
    def schema(self) -> StreamSchema:
        return StreamSchema(n_features=self.n_features, class_labels=(0, 1))


def sea_label(features: Sequence[float], theta: float) -> int:
    """SEA rule: class 1 iff the first two features sum to at most ``theta``."""
    return 1 if features[0] + features[1] <= theta else 0


def transition_probability(spec: DriftSpec, i: int) -> float:
    """Probability that sample ``i`` is drawn from ``spec.to_concept``.

    Sigmoid ramp centered at ``position`` with slope set by ``width``;
    ``width == 1`` degenerates to a hard step at ``position``.
    """
    if spec.width == 1:
        return 1.0 if i >= spec.position else 0.0
    z = -4.0 * (i - spec.position) / spec.width
    if z > 700.0:  # exp overflow guard; probability is 0 to double precision
        return 0.0
    return 1.0 / (1.0 + math.exp(z))


def gradual_mix(spec: DriftSpec, i: int, rng: np.random.Generator) -> int:
    """Pick the active concept for sample ``i`` under a (possibly gradual) drift."""
    p = transition_probability(spec, i)
    if p >= 1.0:
        return spec.to_concept
    if p <= 0.0:
        return spec.from_concept
    return spec.to_concept if rng.random() < p else spec.from_concept


def _active_sea_concept(config: SeaConfig, i: int, rng: np.random.Generator) -> int:
    concept = (
        config.concept_schedule[0].from_concept
        if config.concept_schedule
        else config.initial_concept
    )
    for spec in config.concept_schedule:
        p = transition_probability(spec, i)
        if p >= 1.0:
            concept = spec.to_concept
        elif p > 0.0 and rng.random() < p:
            concept = spec.to_concept
    return concept


def generate_sea(config: SeaConfig) -> Iterator[Instance]:
    """Yield the SEA stream described by ``config``.

    Features are uniform on [0, 10]^3; only the first two matter. The active
    concept at each index follows the drift schedule via ``gradual_mix``; each
    label is then flipped independently with probability ``noise_rate``.
    """
    rng = np.random.default_rng(config.seed)
    for i in range(config.length):
        features = rng.uniform(0.0, 10.0, size=3)
        concept = _active_sea_concept(config, i, rng)
        label = sea_label(features, SEA_THRESHOLDS[concept])
        if config.noise_rate > 0.0 and rng.random() < config.noise_rate:
            label = 1 - label
        yield Instance(index=i, features=features, label=label)


def generate_hyperplane(config: HyperplaneConfig) -> Iterator[Instance]:
    """Yield the rotating-hyperplane stream described by ``config``."""
    rng = np.random.default_rng(config.seed)
    d = config.n_features
    weights = rng.uniform(0.0, 1.0, size=d)
    directions = np.ones(d)
    for i in range(config.length):
        features = rng.random(d)
        label = 1 if float(weights @ features) > 0.5 * float(weights.sum()) else 0
        if config.noise_rate > 0.0 and rng.random() < config.noise_rate:
            label = 1 - label
        if config.mag_change > 0.0:
            weights = weights + directions * config.mag_change
            flips = rng.random(d) < config.sigma
            directions = np.where(flips, -directions, directions)
        yield Instance(index=i, features=features, label=label)


def load_csv_stream(
    path: str, schema: StreamSchema, has_header: bool = False
) -> Iterator[Instance]:
    """Stream instances from a CSV file, one row at a time.

    The last column is the integer class label, all preceding columns are
    numeric features. Rows are validated against ``schema``; violations raise
    :class:`SchemaError` naming the offending row (1-based, header excluded).
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        if has_header:
            next(reader, None)
        index = 0
        for row_number, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != schema.n_features + 1:
                raise SchemaError(
                    f"row {row_number}: expected {schema.n_features} features + label, "
                    f"got {len(row)} columns"
                )
            features = np.empty(schema.n_features)
            for col, cell in enumerate(row[:-1]):
                try:
                    features[col] = float(cell)
                except ValueError:
                    raise SchemaError(
                        f"row {row_number}, column {col + 1}: cannot parse {cell!r} as a number"
                    ) from None
            try:
                raw = float(row[-1])
            except ValueError:
                raise SchemaError(
                    f"row {row_number}, column {len(row)}: cannot parse label {row[-1]!r}"
                ) from None
            if not raw.is_integer():
                raise SchemaError(f"row {row_number}: label {row[-1]!r} is not an integer")
            label = int(raw)
            if label not in schema.class_labels:
                raise SchemaError(
                    f"row {row_number}: label {label} not in schema classes {schema.class_labels}"
                )
            yield Instance(index=index, features=features, label=label)
            index += 1
