"""Drift detection over the prediction-error stream.

Each detector consumes one 0/1 error indicator per prediction (1 = the model
was wrong) and answers with a verdict. A ``DRIFT`` verdict implies the
detector has already reset itself, so the next update starts from a fresh
state. ADWIN is also usable standalone as a change detector over any
bounded value stream (the ensembles use it on member errors).
"""

from __future__ import annotations

import math

import numpy as np
from enum import Enum


class DetectorVerdict(Enum):
    IN_CONTROL = "InControl"
    WARNING = "Warning"
    DRIFT = "Drift"

    def __str__(self) -> str:  # CSV-friendly
        return self.value


# Scan interval for change monitors embedded inside learners (tree nodes,
# ensemble members): batching the cut checks there keeps per-sample cost low
# at a worst-case detection delay of a few samples. The stream-level drift
# detectors below always check every sample.
LEARNER_MONITOR_INTERVAL = 8


class DriftDetector:
    """Base contract: one verdict per error-stream update."""

    def update(self, error: int) -> DetectorVerdict:
        raise NotImplementedError


class NullDetector(DriftDetector):
    """Never signals; used to disable drift-triggered adaptation."""

    def update(self, error: int) -> DetectorVerdict:
        return DetectorVerdict.IN_CONTROL


class DDM(DriftDetector):
    """Error-rate monitor with 2-sigma warning and 3-sigma drift thresholds.

    Tracks the running error rate ``p`` and its binomial deviation ``s``,
    remembers the minimum of ``p + s``, and signals when the current value
    exceeds that minimum by 2 (warning) or 3 (drift) of the minimum's sigma.
    Silent for the first ``warmup`` samples after every reset.
    """

    def __init__(self, warmup: int = 30):
        self.warmup = warmup
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.errors = 0
        self.p_min = math.inf
        self.s_min = math.inf

    def update(self, error: int) -> DetectorVerdict:
        self.n += 1
        self.errors += int(error)
        p = self.errors / self.n
        s = math.sqrt(p * (1.0 - p) / self.n)
        if self.n < self.warmup:
            return DetectorVerdict.IN_CONTROL
        if p + s < self.p_min + self.s_min:
            self.p_min = p
            self.s_min = s
        # Strict comparisons: a degenerate zero-error history (p_min = s_min = 0)
        # must not fire while the error level is still exactly zero.
        level = p + s
        if level > self.p_min + 3.0 * self.s_min:
            self.reset()
            return DetectorVerdict.DRIFT
        if level > self.p_min + 2.0 * self.s_min:
            return DetectorVerdict.WARNING
        return DetectorVerdict.IN_CONTROL


class EDDM(DriftDetector):
    """Monitors the spacing between errors rather than the error rate.

    Shrinking gaps between consecutive errors pull the running mean + 2 std of
    the gap distances below its historical maximum; the ratio of current to
    maximum level triggers warning below ``alpha`` and drift below ``beta``.
    Inactive until ``min_errors`` errors have been observed, which suppresses
    the false alarms the small early-gap statistics would otherwise cause.
    """

    def __init__(self, alpha: float = 0.95, beta: float = 0.90, min_errors: int = 30):
        self.alpha = alpha
        self.beta = beta
        self.min_errors = min_errors
        self.reset()

    def reset(self) -> None:
        self.n = 0
        self.error_count = 0
        self._last_error_at: int | None = None
        self._dist_count = 0
        self._dist_mean = 0.0
        self._dist_m2 = 0.0
        self._max_level = 0.0

    def update(self, error: int) -> DetectorVerdict:
        self.n += 1
        if not error:
            return DetectorVerdict.IN_CONTROL
        self.error_count += 1
        if self._last_error_at is not None:
            distance = self.n - self._last_error_at
            self._dist_count += 1
            delta = distance - self._dist_mean
            self._dist_mean += delta / self._dist_count
            self._dist_m2 += delta * (distance - self._dist_mean)
        self._last_error_at = self.n
        if self._dist_count == 0:
            return DetectorVerdict.IN_CONTROL

        std = math.sqrt(self._dist_m2 / self._dist_count)
        level = self._dist_mean + 2.0 * std
        if level > self._max_level:
            self._max_level = level
        if self.error_count < self.min_errors or self._max_level == 0.0:
            return DetectorVerdict.IN_CONTROL

        ratio = level / self._max_level
        if ratio < self.beta:
            self.reset()
            return DetectorVerdict.DRIFT
        if ratio < self.alpha:
            return DetectorVerdict.WARNING
        return DetectorVerdict.IN_CONTROL


class Adwin:
    """Adaptive windowing over a bounded value stream.

    Keeps an exponential histogram: a flat sequence of buckets from oldest to
    newest with geometrically shrinking coverage (at most ``max_buckets + 1``
    buckets per coverage level). After every insertion the oldest buckets are
    dropped while any split of the window has sub-window means that differ by
    more than the cut threshold at confidence ``delta``.
    """

    MIN_SUBWINDOW = 5

    def __init__(self, delta: float = 0.002, max_buckets: int = 5,
                 check_interval: int = 1):
        if not 0.0 < delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        self.delta = delta
        self.max_buckets = max_buckets
        # Cut checks may be batched (the aggregates stay exact either way);
        # interval 1 scans on every update for minimal detection delay.
        self.check_interval = max(1, check_interval)
        self._since_check = 0
        # Flat histogram, oldest first; sizes are powers of two and
        # non-increasing toward the newest end.
        self._sums: list[float] = []
        self._sizes: list[int] = []
        self._count_by_size: dict[int, int] = {}
        self.width = 0
        self.total = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.width if self.width else 0.0

    @property
    def bucket_count(self) -> int:
        return len(self._sums)

    def update(self, value: float) -> bool:
        """Insert ``value``; return True iff the window was cut (drift)."""
        if not 0.0 <= value <= 1.0:
            raise ValueError("ADWIN values must lie in [0, 1]")
        self._sums.append(float(value))
        self._sizes.append(1)
        self._count_by_size[1] = self._count_by_size.get(1, 0) + 1
        self.width += 1
        self.total += value
        self._compress()
        self._since_check += 1
        if self._since_check < self.check_interval:
            return False
        self._since_check = 0
        return self._shrink()

    def _compress(self) -> None:
        # Same-size buckets are contiguous; merging the two oldest of a level
        # produces one bucket that lands exactly at the end of the next level.
        size = 1
        while self._count_by_size.get(size, 0) > self.max_buckets + 1:
            p = self._first_index_of(size)
            self._sums[p] += self._sums[p + 1]
            self._sizes[p] = size * 2
            del self._sums[p + 1]
            del self._sizes[p + 1]
            self._count_by_size[size] -= 2
            self._count_by_size[size * 2] = self._count_by_size.get(size * 2, 0) + 1
            size *= 2

    def _first_index_of(self, size: int) -> int:
        for i, s in enumerate(self._sizes):
            if s == size:
                return i
        raise RuntimeError("bucket bookkeeping out of sync")

    def _drop_oldest_bucket(self) -> None:
        size = self._sizes[0]
        self.total -= self._sums[0]
        self.width -= size
        del self._sums[0]
        del self._sizes[0]
        self._count_by_size[size] -= 1
        if self._count_by_size[size] == 0:
            del self._count_by_size[size]

    def _find_cut(self) -> bool:
        n = len(self._sizes)
        if n < 2:
            return False
        sizes = np.array(self._sizes, dtype=np.float64)
        sums = np.array(self._sums, dtype=np.float64)
        n0 = np.cumsum(sizes)[:-1]
        s0 = np.cumsum(sums)[:-1]
        n1 = self.width - n0
        valid = (n0 >= self.MIN_SUBWINDOW) & (n1 >= self.MIN_SUBWINDOW)
        if not valid.any():
            return False
        with np.errstate(divide="ignore", invalid="ignore"):
            # epsilon_cut = sqrt(ln(4/delta') / 2m), m the harmonic size mean
            # of the two sub-windows, delta' = delta / width.
            m = 1.0 / (1.0 / n0 + 1.0 / n1)
            log_term = math.log(4.0 * self.width / self.delta)
            epsilon = np.sqrt(log_term / (2.0 * m))
            diff = np.abs(s0 / n0 - (self.total - s0) / n1)
        return bool(np.any(valid & (diff > epsilon)))

    def _shrink(self) -> bool:
        if self.width < 2 * self.MIN_SUBWINDOW:
            return False
        cut = False
        while self._find_cut():
            cut = True
            self._drop_oldest_bucket()
            if self.width < 2 * self.MIN_SUBWINDOW:
                break
        return cut


class AdwinDetector(DriftDetector):
    """ADWIN on the 0/1 error stream; a window cut is reported as drift."""

    def __init__(self, delta: float = 0.002):
        self.adwin = Adwin(delta=delta)

    def update(self, error: int) -> DetectorVerdict:
        if self.adwin.update(float(error)):
            return DetectorVerdict.DRIFT
        return DetectorVerdict.IN_CONTROL


DETECTORS = {
    "DDM": DDM,
    "EDDM": EDDM,
    "ADWIN": AdwinDetector,
    "none": NullDetector,
}


def make_detector(name: str) -> DriftDetector:
    try:
        return DETECTORS[name]()
    except KeyError:
        raise ValueError(f"unknown detector {name!r}; choose from {sorted(DETECTORS)}") from None
