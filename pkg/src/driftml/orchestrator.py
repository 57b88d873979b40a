"""The online controller: initial search, test-then-train loop, drift-triggered
and scheduled re-search, and three model-adaptation strategies.

Per online sample the loop runs in a fixed order: predict, update the metric,
train the active model, update the drift detector, then (on a drift verdict or
after ``max_train`` samples without training) redesign the pipeline on the
sliding buffer and apply the configured strategy:

* Basic       -- the new champion replaces the active model outright.
* Ensemble    -- the champion is compared (clone-scored on the buffer) against
                 an equal-vote backup ensemble of recent champions; the better
                 one becomes active, the champion joins the ensemble, and the
                 oldest member is dropped over capacity (FIFO).
* ModelStore  -- every stored pipeline and the champion are clone-scored on
                 the buffer; the best becomes active, the champion is stored,
                 and the lowest-scoring entry is evicted over capacity.

The comparisons run on clones, so live model state is never touched by
scoring. In synchronous mode (default, deterministic) stream consumption
pauses during a search; in asynchronous mode the old model keeps serving and
the winner is installed atomically between samples.
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from driftml.detectors import DetectorVerdict, make_detector
from driftml.evaluation import (
    PrequentialMetric,
    RunTrace,
    TraceRow,
    make_metric,
    score_on_window,
)
from driftml.learners.base import argmax_class, normalize_votes
from driftml.pipeline import OnlinePipeline
from driftml.search.engine import SearchBudget, SearchOutcome, make_search
from driftml.search.space import ConfigSpace
from driftml.streams import Instance, StreamSchema

SOURCE_AUTOML = "AutoML"
SOURCE_ENSEMBLE = "Ensemble"
SOURCE_MODEL_STORE = "ModelStore"

EVENTS_HEADER = "index,event,detail"
SEARCH_LOG_HEADER = "wall_time,strategy,genotype,rung_or_generation,score,error"


class ConfigError(ValueError):
    """Invalid controller configuration or an unusable stream."""


@dataclass
class ControllerConfig:
    n_0: int = 5000
    n_s: int = 5000
    t_max: float = 600.0
    max_train: Optional[int] = 50_000  # None disables scheduled retraining
    k: int = 5
    strategy: str = "Ensemble"
    detector: str = "EDDM"
    search_algorithm: str = "async_ea"
    metric: str = "accuracy"
    seed: int = 0
    async_search: bool = False
    max_evaluations: Optional[int] = None
    worker_count: int = 1
    ea_population: int = 20
    ea_warm_start: bool = False
    train_inactive_models: bool = False
    acc_window: int = 1000

    def __post_init__(self) -> None:
        if self.n_0 < self.n_s:
            raise ConfigError(f"n_0 ({self.n_0}) must be >= n_s ({self.n_s})")
        if self.n_s < 1:
            raise ConfigError("n_s must be >= 1")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.max_train is not None and self.max_train <= 0:
            raise ConfigError("max_train must be positive (or None to disable)")
        if self.strategy not in ("Basic", "Ensemble", "ModelStore"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")


@dataclass
class EventRow:
    index: int
    event: str
    detail: str

    def as_csv(self) -> str:
        detail = self.detail.replace(",", ";")
        return f"{self.index},{self.event},{detail}"


@dataclass
class SearchLogRow:
    wall_time: float
    strategy: str
    genotype: str
    tag: str
    score: float
    error: str

    def as_csv(self) -> str:
        genotype = self.genotype.replace(",", ";")
        error = (self.error or "").replace(",", ";")
        return (f"{self.wall_time:.3f},{self.strategy},{genotype},"
                f"{self.tag},{self.score:.6f},{error}")


@dataclass
class RunResult:
    trace: RunTrace
    events: list[EventRow]
    search_log: list[SearchLogRow]
    final_accuracy: float
    drift_count: int
    scheduled_retrain_count: int
    model_switch_count: int
    search_count: int
    wall_clock: float
    online_samples: int

    def summary(self) -> dict:
        return {
            "final_accuracy": self.final_accuracy,
            "online_samples": self.online_samples,
            "drift_count": self.drift_count,
            "scheduled_retrain_count": self.scheduled_retrain_count,
            "model_switch_count": self.model_switch_count,
            "search_count": self.search_count,
            "wall_clock_seconds": round(self.wall_clock, 3),
        }


class BackupEnsemble:
    """Equal-vote committee of the most recent champions (FIFO over capacity)."""

    def __init__(self, capacity: int, classes: tuple[int, ...]):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.classes = tuple(sorted(classes))
        self.members: list[OnlinePipeline] = []

    def __len__(self) -> int:
        return len(self.members)

    def append(self, pipeline: OnlinePipeline) -> Optional[OnlinePipeline]:
        """Add the newest champion; returns the evicted oldest member, if any."""
        self.members.append(pipeline)
        if len(self.members) > self.capacity:
            return self.members.pop(0)
        return None

    def snapshot(self) -> "BackupEnsemble":
        """Committee view of the current members (shared pipeline objects).

        The adaptation step activates the ensemble as it was compared, so the
        champion appended afterwards votes only from the next adaptation on.
        """
        view = BackupEnsemble(self.capacity, self.classes)
        view.members = list(self.members)
        return view

    def predict_proba_one(self, x) -> dict[int, float]:
        if not self.members:
            raise ValueError("ensemble is empty")
        votes: dict[int, float] = {}
        for member in self.members:
            pred = member.predict_one(x)
            votes[pred] = votes.get(pred, 0.0) + 1.0
        return normalize_votes(votes, self.classes)

    def predict_one(self, x) -> int:
        return argmax_class(self.predict_proba_one(x), self.classes)

    def learn_one(self, x, y, weight: float = 1.0) -> None:
        for member in self.members:
            member.learn_one(x, y, weight)

    @property
    def classifier_name(self) -> str:
        return f"BackupEnsemble[{len(self.members)}]"


@dataclass
class StoreEntry:
    pipeline: OnlinePipeline
    score: float
    inserted_at: int


class ModelStore:
    """Score-evicted memory of past champions with their latest window scores."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.entries: list[StoreEntry] = []
        self._counter = 0

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, pipeline: OnlinePipeline, score: float) -> Optional[StoreEntry]:
        """Insert; over capacity the lowest-scoring entry (oldest on ties) leaves."""
        self.entries.append(StoreEntry(pipeline, score, self._counter))
        self._counter += 1
        if len(self.entries) > self.capacity:
            worst = min(self.entries, key=lambda e: (e.score, e.inserted_at))
            self.entries.remove(worst)
            return worst
        return None


class PipelineSearcher:
    """Runs the configured search algorithm over a window snapshot."""

    def __init__(self, space: ConfigSpace, schema: StreamSchema, config: ControllerConfig):
        self.space = space
        self.schema = schema
        self.config = config
        self._strategy = make_search(config.search_algorithm)
        seq = np.random.SeedSequence(config.seed)
        self._search_seeds = seq.spawn(1)[0]
        self._rng_seeds = seq.spawn(1)[0]

    def search(self, window: Sequence[Instance], warm_start=()) -> SearchOutcome:
        budget = SearchBudget(
            wall_clock_seconds=self.config.t_max,
            max_evaluations=self.config.max_evaluations,
            worker_count=self.config.worker_count,
        )
        rng = np.random.default_rng(self._rng_seeds.spawn(1)[0])
        seed = int(self._search_seeds.spawn(1)[0].generate_state(1)[0])
        kwargs = dict(metric_name=self.config.metric, seed=seed)
        if self.config.search_algorithm == "async_ea":
            kwargs["population_size"] = self.config.ea_population
            kwargs["seed_genotypes"] = list(warm_start)
        return self._strategy(self.space, window, self.schema, budget, rng, **kwargs)


class OnlineController:
    """Drives one run: initial search, online loop, adaptation on triggers."""

    def __init__(self, config: ControllerConfig, schema: StreamSchema,
                 searcher=None, detector=None, space: Optional[ConfigSpace] = None):
        self.config = config
        self.schema = schema
        self.space = space if space is not None else ConfigSpace()
        self.searcher = searcher if searcher is not None else PipelineSearcher(
            self.space, schema, config)
        self.detector = detector if detector is not None else make_detector(config.detector)

        self.active_model = None
        self.active_source = SOURCE_AUTOML
        self.champion_genotype = None
        self.ensemble: Optional[BackupEnsemble] = None
        self.store: Optional[ModelStore] = None
        if config.strategy == "Ensemble":
            self.ensemble = BackupEnsemble(config.k, schema.class_labels)
        elif config.strategy == "ModelStore":
            self.store = ModelStore(config.k)

        self.trace = RunTrace()
        self.events: list[EventRow] = []
        self.search_log: list[SearchLogRow] = []
        self.drift_count = 0
        self.scheduled_retrain_count = 0
        self.model_switch_count = 0
        self.search_count = 0
        self._samples_since_training = 0
        self._t0 = 0.0
        self._background: Optional[threading.Thread] = None
        self._pending: Optional[tuple[SearchOutcome, int, str]] = None

    # -- helpers -------------------------------------------------------------

    def _event(self, index: int, event: str, detail: str = "") -> None:
        self.events.append(EventRow(index, event, detail))

    def _log_search(self, outcome: SearchOutcome, started_at: float) -> None:
        for res in outcome.evaluations:
            self.search_log.append(SearchLogRow(
                wall_time=started_at + res.start_time, strategy=outcome.strategy,
                genotype=res.genotype.describe(), tag=res.tag or "0",
                score=res.score, error=res.error or "",
            ))

    def _active_classifier_name(self) -> str:
        return self._name_of(self.active_model)

    def _switch_active(self, model, source: str, index: int) -> None:
        if model is not self.active_model:
            self.model_switch_count += 1
            self._event(index, "model_switch",
                        f"{self.active_source}->{source}:{self._name_of(model)}")
        self.active_model = model
        self.active_source = source

    @staticmethod
    def _name_of(model) -> str:
        return model.classifier_name if hasattr(model, "classifier_name") else type(model).__name__

    # -- run -----------------------------------------------------------------

    def run(self, stream: Iterable[Instance]) -> RunResult:
        self._t0 = time.monotonic()
        iterator = iter(stream)
        initial = self._take_initial(iterator)
        buffer: deque[Instance] = deque(initial[-self.config.n_s:],
                                        maxlen=self.config.n_s)

        self._event(initial[-1].index, "search_started", "initial")
        search_started_at = time.monotonic() - self._t0
        outcome = self.searcher.search(list(initial))
        self.search_count += 1
        self._log_search(outcome, search_started_at)
        self._event(initial[-1].index, "search_finished",
                    f"{outcome.champion.genotype.describe()} score={outcome.champion.score:.4f}")
        self.champion_genotype = outcome.champion.genotype
        self._switch_active(outcome.pipeline, SOURCE_AUTOML, initial[-1].index)
        if self.ensemble is not None:
            self.ensemble.append(outcome.pipeline)
        if self.store is not None:
            self.store.add(outcome.pipeline, outcome.champion.score)

        metric = PrequentialMetric(metric=make_metric(self.config.metric),
                                   window_capacity=self.config.acc_window)
        online_samples = 0
        for instance in iterator:
            if instance.label is None:
                raise ConfigError(f"instance {instance.index} has no label")
            online_samples += 1
            self._process_sample(instance, metric, buffer)
        if online_samples == 0:
            raise ConfigError("stream ended during the initial batch; nothing to run online")
        self._finish_background(buffer)

        return RunResult(
            trace=self.trace,
            events=self.events,
            search_log=self.search_log,
            final_accuracy=metric.accuracy,
            drift_count=self.drift_count,
            scheduled_retrain_count=self.scheduled_retrain_count,
            model_switch_count=self.model_switch_count,
            search_count=self.search_count,
            wall_clock=time.monotonic() - self._t0,
            online_samples=online_samples,
        )

    def _take_initial(self, iterator: Iterator[Instance]) -> list[Instance]:
        initial = []
        for _ in range(self.config.n_0):
            try:
                instance = next(iterator)
            except StopIteration:
                raise ConfigError(
                    f"stream shorter than the initial batch n_0={self.config.n_0}"
                ) from None
            if instance.label is None:
                raise ConfigError(f"instance {instance.index} has no label")
            initial.append(instance)
        return initial

    def _process_sample(self, instance: Instance, metric: PrequentialMetric,
                        buffer: deque) -> None:
        x, y = instance.features, instance.label
        prediction = self.active_model.predict_one(x)
        metric.update(y, prediction)
        self.active_model.learn_one(x, y)
        if self.config.train_inactive_models:
            self._train_inactive(x, y)
        verdict = self.detector.update(0 if prediction == y else 1)
        buffer.append(instance)
        self._samples_since_training += 1

        retrain = False
        if verdict is DetectorVerdict.DRIFT:
            self.drift_count += 1
            self._event(instance.index, "drift", self.config.detector)
            retrain = True
        elif (self.config.max_train is not None
              and self._samples_since_training >= self.config.max_train):
            self.scheduled_retrain_count += 1
            self._event(instance.index, "scheduled_retrain",
                        f"max_train={self.config.max_train}")
            retrain = True

        if retrain:
            if self.config.async_search:
                self._launch_background(instance.index, buffer)
            else:
                self._adapt(instance.index, buffer)
        if self.config.async_search:
            self._install_pending(instance.index, buffer)

        self.trace.append(TraceRow(
            index=instance.index,
            prediction=prediction,
            truth=y,
            acc_cum=metric.accuracy,
            acc_win=metric.window_accuracy,
            verdict=str(verdict),
            source=self.active_source,
            retrain=1 if retrain else 0,
            classifier=self._active_classifier_name(),
        ))

    def _train_inactive(self, x, y) -> None:
        live = self.active_model
        live_ids = {id(live)}
        if isinstance(live, BackupEnsemble):
            live_ids.update(id(m) for m in live.members)
        if self.store is not None:
            for entry in self.store.entries:
                if id(entry.pipeline) not in live_ids:
                    entry.pipeline.learn_one(x, y)
        if self.ensemble is not None:
            for member in self.ensemble.members:
                if id(member) not in live_ids:
                    member.learn_one(x, y)

    # -- adaptation ------------------------------------------------------------

    def _adapt(self, index: int, buffer: deque) -> None:
        window = list(buffer)
        self._event(index, "search_started", self.config.strategy)
        warm = [self.champion_genotype] if (self.config.ea_warm_start
                                            and self.champion_genotype) else []
        search_started_at = time.monotonic() - self._t0
        outcome = self.searcher.search(window, warm_start=warm)
        self.search_count += 1
        self._log_search(outcome, search_started_at)
        self._event(index, "search_finished",
                    f"{outcome.champion.genotype.describe()} score={outcome.champion.score:.4f}")
        self._apply_strategy(outcome, index, window)

    def _apply_strategy(self, outcome: SearchOutcome, index: int,
                        window: list[Instance]) -> None:
        champion = outcome.pipeline
        self.champion_genotype = outcome.champion.genotype

        if self.config.strategy == "Basic":
            self._switch_active(champion, SOURCE_AUTOML, index)

        elif self.config.strategy == "Ensemble":
            metric_factory = lambda: make_metric(self.config.metric)
            ensemble_score = score_on_window(self.ensemble, window, clone=True,
                                             metric=metric_factory())
            champion_score = score_on_window(champion, window, clone=True,
                                             metric=metric_factory())
            # Lower loss wins; the backup ensemble keeps the tie. The winner is
            # the committee as evaluated, so the champion appended below only
            # votes from the next adaptation on.
            if 1.0 - ensemble_score <= 1.0 - champion_score:
                self._switch_active(self.ensemble.snapshot(), SOURCE_ENSEMBLE, index)
            else:
                self._switch_active(champion, SOURCE_AUTOML, index)
            self.ensemble.append(champion)

        else:  # ModelStore
            metric_factory = lambda: make_metric(self.config.metric)
            candidates = []
            for entry in self.store.entries:
                entry.score = score_on_window(entry.pipeline, window, clone=True,
                                              metric=metric_factory())
                candidates.append((entry.score, entry.inserted_at,
                                   entry.pipeline, SOURCE_MODEL_STORE))
            champion_score = score_on_window(champion, window, clone=True,
                                             metric=metric_factory())
            candidates.append((champion_score, float("inf"), champion, SOURCE_AUTOML))
            # Highest score wins; stored pipelines (earlier insertion) keep ties.
            best = max(candidates, key=lambda c: (c[0], -c[1]))
            self._switch_active(best[2], best[3], index)
            self.store.add(champion, champion_score)

        self._samples_since_training = 0

    # -- asynchronous mode -------------------------------------------------------

    def _launch_background(self, index: int, buffer: deque) -> None:
        if self._background is not None and self._background.is_alive():
            self._event(index, "search_skipped", "search already running")
            return
        snapshot = list(buffer)
        warm = [self.champion_genotype] if (self.config.ea_warm_start
                                            and self.champion_genotype) else []

        started_at = time.monotonic() - self._t0

        def work():
            outcome = self.searcher.search(snapshot, warm_start=warm)
            self._pending = (outcome, index, started_at)

        self._event(index, "search_started", f"async {self.config.strategy}")
        self._background = threading.Thread(target=work, daemon=True)
        self._background.start()

    def _install_pending(self, index: int, buffer: deque) -> None:
        if self._pending is None:
            return
        outcome, trigger_index, started_at = self._pending
        self._pending = None
        self.search_count += 1
        self._log_search(outcome, started_at)
        self._event(index, "search_finished",
                    f"async trigger@{trigger_index} "
                    f"{outcome.champion.genotype.describe()} score={outcome.champion.score:.4f}")
        self._apply_strategy(outcome, index, list(buffer))

    def _finish_background(self, buffer: deque) -> None:
        if self._background is not None and self._background.is_alive():
            self._background.join()
        if self._pending is not None and self.trace.rows:
            self._install_pending(self.trace.rows[-1].index, buffer)


def write_events_csv(events: list[EventRow], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(EVENTS_HEADER + "\n")
        for event in events:
            fh.write(event.as_csv() + "\n")


def write_search_log_csv(rows: list[SearchLogRow], path: str) -> None:
    with open(path, "w") as fh:
        fh.write(SEARCH_LOG_HEADER + "\n")
        for row in rows:
            fh.write(row.as_csv() + "\n")
