"""Single-pass online transformers: scalers, normalizer, binarizer, polynomial features.

All transformers follow the same two-method contract: ``learn_one(x)`` updates
internal statistics from one feature vector, ``transform_one(x)`` maps a vector
using the statistics seen so far. Stateful scalers act as the identity until
their first ``learn_one`` so pipelines can predict from the very first sample;
degenerate scales (zero variance, min == max, zero norm) map the affected
features to 0 instead of raising.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


class RunningMoments:
    """Per-feature count/mean/M2 accumulator (Welford update).

    Variance is the population variance ``m2 / count``.
    """

    def __init__(self, n_features: int):
        self.count = 0
        self.mean = np.zeros(n_features)
        self.m2 = np.zeros(n_features)

    def update(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    @property
    def variance(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros_like(self.m2)
        return self.m2 / self.count

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)


class P2Quantile:
    """Streaming quantile estimate for a single feature (P-square method).

    Keeps five markers; before five observations the estimate interpolates the
    sorted values seen so far.
    """

    def __init__(self, q: float):
        if not 0.0 <= q <= 1.0:
            raise ValueError("quantile must lie in [0, 1]")
        self.q = q
        self._initial: list[float] = []
        self._heights: list[float] = []
        self._positions: list[float] = []
        self._desired: list[float] = []
        self._increments: list[float] = []

    def update(self, value: float) -> None:
        if len(self._initial) < 5:
            self._initial.append(value)
            if len(self._initial) == 5:
                self._heights = sorted(self._initial)
                self._positions = [1.0, 2.0, 3.0, 4.0, 5.0]
                q = self.q
                self._desired = [1.0, 1.0 + 2.0 * q, 1.0 + 4.0 * q, 3.0 + 2.0 * q, 5.0]
                self._increments = [0.0, q / 2.0, q, (1.0 + q) / 2.0, 1.0]
            return

        h = self._heights
        pos = self._positions
        if value < h[0]:
            h[0] = value
            k = 0
        elif value >= h[4]:
            h[4] = value
            k = 3
        else:
            k = 0
            for i in range(1, 4):
                if value < h[i]:
                    k = i - 1
                    break
            else:
                k = 3
        for i in range(k + 1, 5):
            pos[i] += 1.0
        for i in range(5):
            self._desired[i] += self._increments[i]

        for i in range(1, 4):
            d = self._desired[i] - pos[i]
            if (d >= 1.0 and pos[i + 1] - pos[i] > 1.0) or (d <= -1.0 and pos[i - 1] - pos[i] < -1.0):
                sign = 1.0 if d >= 1.0 else -1.0
                candidate = self._parabolic(i, sign)
                if h[i - 1] < candidate < h[i + 1]:
                    h[i] = candidate
                else:
                    h[i] = self._linear(i, sign)
                pos[i] += sign

    def _parabolic(self, i: int, sign: float) -> float:
        h, pos = self._heights, self._positions
        term1 = sign / (pos[i + 1] - pos[i - 1])
        term2 = (pos[i] - pos[i - 1] + sign) * (h[i + 1] - h[i]) / (pos[i + 1] - pos[i])
        term3 = (pos[i + 1] - pos[i] - sign) * (h[i] - h[i - 1]) / (pos[i] - pos[i - 1])
        return h[i] + term1 * (term2 + term3)

    def _linear(self, i: int, sign: float) -> float:
        h, pos = self._heights, self._positions
        j = i + int(sign)
        return h[i] + sign * (h[j] - h[i]) / (pos[j] - pos[i])

    @property
    def estimate(self) -> float:
        if not self._initial:
            return 0.0
        if len(self._initial) < 5:
            ordered = sorted(self._initial)
            rank = self.q * (len(ordered) - 1)
            lo = int(math.floor(rank))
            hi = min(lo + 1, len(ordered) - 1)
            frac = rank - lo
            return ordered[lo] * (1 - frac) + ordered[hi] * frac
        return self._heights[2]


class RunningQuantiles:
    """Per-feature lower/median/upper quantile estimates.

    Estimates are sorted on read so the triple is always ordered, even if the
    underlying marker estimators momentarily cross.
    """

    def __init__(self, n_features: int, q_inf: float, q_sup: float):
        self.n_features = n_features
        self._estimators = [
            (P2Quantile(q_inf), P2Quantile(0.5), P2Quantile(q_sup)) for _ in range(n_features)
        ]

    def update(self, x: np.ndarray) -> None:
        for j in range(self.n_features):
            for est in self._estimators[j]:
                est.update(float(x[j]))

    def estimates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        lows, meds, highs = [], [], []
        for triple in self._estimators:
            lo, med, hi = sorted(e.estimate for e in triple)
            lows.append(lo)
            meds.append(med)
            highs.append(hi)
        return np.array(lows), np.array(meds), np.array(highs)


def _safe_divide(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=float)
    np.divide(num, den, out=out, where=den != 0)
    return out


class Transformer:
    """Base contract: learn-one / transform-one with a fixed dimensionality."""

    def __init__(self):
        self._n_features: int | None = None

    def _check_dim(self, x: np.ndarray) -> None:
        if self._n_features is None:
            self._n_features = len(x)
        elif len(x) != self._n_features:
            raise ValueError(
                f"feature dimensionality changed from {self._n_features} to {len(x)}"
            )

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        return x


class StandardScaler(Transformer):
    """(x - mean) / std with running moments; constant features map to 0."""

    def __init__(self):
        super().__init__()
        self._moments: RunningMoments | None = None

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)
        if self._moments is None:
            self._moments = RunningMoments(len(x))
        self._moments.update(x)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        if self._moments is None:
            return x
        return _safe_divide(x - self._moments.mean, self._moments.std)

    @property
    def moments(self) -> RunningMoments | None:
        return self._moments


class AdaptiveStandardScaler(Transformer):
    """Standard scaling with exponentially weighted mean/variance.

    The smoothing constant keeps memory bounded and lets the statistics track
    drifting feature distributions.
    """

    def __init__(self, alpha: float = 0.3):
        super().__init__()
        self.alpha = alpha
        self._mean: np.ndarray | None = None
        self._var: np.ndarray | None = None

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)
        if self._mean is None:
            self._mean = x.astype(float).copy()
            self._var = np.zeros(len(x))
            return
        diff = x - self._mean
        incr = self.alpha * diff
        self._mean = self._mean + incr
        self._var = (1 - self.alpha) * (self._var + diff * incr)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        if self._mean is None:
            return x
        return _safe_divide(x - self._mean, np.sqrt(self._var))


class MinMaxScaler(Transformer):
    """(x - min) / (max - min); collapses to 0 while max == min."""

    def __init__(self):
        super().__init__()
        self.min: np.ndarray | None = None
        self.max: np.ndarray | None = None

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)
        if self.min is None:
            self.min = x.astype(float).copy()
            self.max = x.astype(float).copy()
        else:
            self.min = np.minimum(self.min, x)
            self.max = np.maximum(self.max, x)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        if self.min is None:
            return x
        return _safe_divide(x - self.min, self.max - self.min)


class MaxAbsScaler(Transformer):
    """x / max|x| per feature; all-zero features stay 0."""

    def __init__(self):
        super().__init__()
        self.max_abs: np.ndarray | None = None

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)
        if self.max_abs is None:
            self.max_abs = np.abs(x).astype(float)
        else:
            self.max_abs = np.maximum(self.max_abs, np.abs(x))

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        if self.max_abs is None:
            return x
        return _safe_divide(x, self.max_abs)


class RobustScaler(Transformer):
    """Center by the running median, scale by the running inter-quantile range."""

    def __init__(self, with_centering: bool = True, with_scaling: bool = True,
                 q_inf: float = 0.25, q_sup: float = 0.75):
        super().__init__()
        self.with_centering = with_centering
        self.with_scaling = with_scaling
        self.q_inf = q_inf
        self.q_sup = q_sup
        self._quantiles: RunningQuantiles | None = None

    def learn_one(self, x: np.ndarray) -> None:
        self._check_dim(x)
        if self._quantiles is None:
            self._quantiles = RunningQuantiles(len(x), self.q_inf, self.q_sup)
        self._quantiles.update(x)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        if self._quantiles is None:
            return x
        low, med, high = self._quantiles.estimates()
        out = x - med if self.with_centering else x.astype(float)
        if self.with_scaling:
            out = _safe_divide(out, high - low)
        return out


class Normalizer(Transformer):
    """Scale each vector to unit L1 or L2 norm (stateless)."""

    def __init__(self, order: str = "L2"):
        super().__init__()
        if order not in ("L1", "L2"):
            raise ValueError("order must be 'L1' or 'L2'")
        self.order = order

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        # Pre-scale by the largest magnitude so extreme values cannot
        # underflow or overflow the norm computation.
        peak = float(np.max(np.abs(x))) if len(x) else 0.0
        if peak == 0.0:
            return np.zeros_like(x, dtype=float)
        scaled = x / peak
        norm = float(np.sum(np.abs(scaled))) if self.order == "L1" else float(np.linalg.norm(scaled))
        return scaled / norm


class Binarizer(Transformer):
    """Map each feature to 1 iff strictly above the threshold (stateless)."""

    def __init__(self, threshold: float = 0.0):
        super().__init__()
        self.threshold = threshold

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        return (x > self.threshold).astype(float)


class PolynomialExtender(Transformer):
    """Append all monomials of the input features up to ``degree``.

    ``interaction_only`` keeps only products of distinct features;
    ``include_bias`` prepends a constant 1. Degree-1 terms come first, then
    higher degrees in combination order, e.g. [a, b] -> [a, b, a^2, ab, b^2].
    """

    def __init__(self, degree: int = 2, interaction_only: bool = False,
                 include_bias: bool = False):
        super().__init__()
        if degree < 1:
            raise ValueError("degree must be >= 1")
        self.degree = degree
        self.interaction_only = interaction_only
        self.include_bias = include_bias

    def _index_tuples(self, d: int):
        combiner = (
            itertools.combinations if self.interaction_only else itertools.combinations_with_replacement
        )
        for deg in range(1, self.degree + 1):
            yield from combiner(range(d), deg)

    def output_dim(self, n_features: int) -> int:
        count = sum(1 for _ in self._index_tuples(n_features))
        return count + (1 if self.include_bias else 0)

    def transform_one(self, x: np.ndarray) -> np.ndarray:
        terms = [math.prod(float(x[i]) for i in idx) for idx in self._index_tuples(len(x))]
        if self.include_bias:
            terms.insert(0, 1.0)
        return np.array(terms)
