"""Budgeted asynchronous pipeline search: random, successive halving, evolution.

All strategies share one coordinator loop: genotypes are proposed by the
strategy, evaluated prequentially on (a prefix of) the data window by a pool
of workers, and fed back as results. No evaluation starts after the wall-clock
budget elapses or the evaluation cap is reached. ``worker_count=1`` runs
evaluations inline, which is the deterministic replay mode.

Every strategy hands back a champion already re-instantiated and trained on
the full window; if nothing evaluated successfully, a default-configuration
fallback pipeline is returned instead so the caller always has a live model.
"""

from __future__ import annotations

import time
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from driftml.evaluation import make_metric, prequential_step
from driftml.search.space import ConfigSpace, PipelineGenotype, build_pipeline
from driftml.streams import Instance, StreamSchema


@dataclass
class SearchBudget:
    """Stop conditions for one search run; at least one limit must be finite."""

    wall_clock_seconds: Optional[float] = None
    max_evaluations: Optional[int] = None
    worker_count: int = 1

    def __post_init__(self) -> None:
        if self.wall_clock_seconds is None and self.max_evaluations is None:
            raise ValueError("budget needs a wall-clock limit or an evaluation cap")
        if self.wall_clock_seconds is not None and self.wall_clock_seconds <= 0:
            raise ValueError("wall_clock_seconds must be positive")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")
        if self.worker_count < 1:
            raise ValueError("worker_count must be >= 1")


@dataclass
class EvaluationResult:
    genotype: PipelineGenotype
    score: float
    samples_used: int
    duration: float
    error: Optional[str] = None
    order: int = 0          # completion order
    start_time: float = 0.0  # seconds since search start, at evaluation start
    tag: str = ""           # rung index or generation label
    seed: Optional[int] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass
class SearchOutcome:
    champion: EvaluationResult
    pipeline: object  # OnlinePipeline, trained on the full window
    evaluations: list[EvaluationResult] = field(default_factory=list)
    strategy: str = ""
    fallback: bool = False


def evaluate_candidate(genotype: PipelineGenotype, window: Sequence[Instance],
                       n_samples: int, schema: StreamSchema, seed=None,
                       metric_name: str = "accuracy") -> EvaluationResult:
    """Prequential test-then-train score of a fresh pipeline on the window prefix.

    Any exception is contained: the result carries the failure text and the
    worst possible score instead of raising.
    """
    n_samples = min(n_samples, len(window))
    started = time.perf_counter()
    try:
        pipeline = build_pipeline(genotype, schema, seed=seed)
        metric = make_metric(metric_name)
        for instance in window[:n_samples]:
            prequential_step(pipeline, metric, instance)
        score = metric.value
        error = None
    except Exception as exc:  # failed candidates must not kill the search
        score = 0.0
        error = f"{type(exc).__name__}: {exc}"
    duration = time.perf_counter() - started
    return EvaluationResult(genotype=genotype, score=score, samples_used=n_samples,
                            duration=duration, error=error, seed=seed)


class _Coordinator:
    """Dispatches evaluations under the budget; owns all seeds and telemetry."""

    def __init__(self, window, schema, budget: SearchBudget, metric_name: str, seed):
        self.window = list(window)
        self.schema = schema
        self.budget = budget
        self.metric_name = metric_name
        self._seed_seq = np.random.SeedSequence(seed)
        self._started = 0
        self._completed: list[EvaluationResult] = []
        self._t0 = time.monotonic()
        self._inline_queue: list[EvaluationResult] = []
        self._pool: Optional[ThreadPoolExecutor] = None
        self._futures: dict[Future, tuple[float, str]] = {}
        if budget.worker_count > 1:
            self._pool = ThreadPoolExecutor(max_workers=budget.worker_count)

    def elapsed(self) -> float:
        return time.monotonic() - self._t0

    def budget_allows_start(self) -> bool:
        if (self.budget.max_evaluations is not None
                and self._started >= self.budget.max_evaluations):
            return False
        if (self.budget.wall_clock_seconds is not None
                and self.elapsed() >= self.budget.wall_clock_seconds):
            return False
        return True

    def can_submit(self) -> bool:
        if not self.budget_allows_start():
            return False
        if self._pool is None:
            return not self._inline_queue  # lockstep: one result at a time
        return len(self._futures) < self.budget.worker_count

    def submit(self, genotype: PipelineGenotype, n_samples: int, tag: str = "") -> None:
        seed = int(self._seed_seq.spawn(1)[0].generate_state(1)[0])
        start_time = self.elapsed()
        self._started += 1
        if self._pool is None:
            result = evaluate_candidate(genotype, self.window, n_samples,
                                        self.schema, seed, self.metric_name)
            result.start_time = start_time
            result.tag = tag
            self._inline_queue.append(result)
        else:
            future = self._pool.submit(evaluate_candidate, genotype, self.window,
                                       n_samples, self.schema, seed, self.metric_name)
            self._futures[future] = (start_time, tag)

    @property
    def has_pending(self) -> bool:
        return bool(self._inline_queue) or bool(self._futures)

    def next_result(self) -> EvaluationResult:
        if self._pool is None:
            result = self._inline_queue.pop(0)
        else:
            done, _ = wait(list(self._futures), return_when=FIRST_COMPLETED)
            future = min(done, key=lambda f: self._futures[f])
            start_time, tag = self._futures.pop(future)
            result = future.result()
            result.start_time = start_time
            result.tag = tag
        result.order = len(self._completed)
        self._completed.append(result)
        return result

    @property
    def completed(self) -> list[EvaluationResult]:
        return self._completed

    def shutdown(self) -> None:
        if self._pool is not None:
            self._pool.shutdown(wait=True)


def _champion_of(results: Sequence[EvaluationResult]) -> Optional[EvaluationResult]:
    """Best successful score; ties go to the earlier completion."""
    best = None
    for res in results:
        if res.failed:
            continue
        if best is None or res.score > best.score:
            best = res
    return best


def _train_on_window(pipeline, window) -> None:
    for instance in window:
        pipeline.learn_one(instance.features, instance.label)


def _finalize(strategy: str, space: ConfigSpace, window, schema,
              coordinator: _Coordinator,
              champion: Optional[EvaluationResult]) -> SearchOutcome:
    coordinator.shutdown()
    if champion is None:
        # Total failure: fall back to the default-configuration classifier so
        # the online loop keeps a live model. Best effort: an untrained
        # fallback still predicts.
        genotype = PipelineGenotype((), space.default_classifier(), provenance="fallback")
        pipeline = build_pipeline(genotype, schema, seed=0)
        try:
            _train_on_window(pipeline, window)
        except Exception:
            pipeline = build_pipeline(genotype, schema, seed=0)
        champion = EvaluationResult(
            genotype=genotype, score=0.0, samples_used=len(window), duration=0.0,
            error="fallback: no successful evaluation", tag="fallback",
        )
        return SearchOutcome(champion, pipeline, coordinator.completed, strategy, True)
    pipeline = build_pipeline(champion.genotype, schema, seed=champion.seed)
    _train_on_window(pipeline, window)
    return SearchOutcome(champion, pipeline, coordinator.completed, strategy, False)


def run_random_search(space: ConfigSpace, window, schema: StreamSchema,
                      budget: SearchBudget, rng: np.random.Generator,
                      metric_name: str = "accuracy", seed=None) -> SearchOutcome:
    """Draw-and-evaluate full-window candidates until the budget runs out."""
    coordinator = _Coordinator(window, schema, budget, metric_name, seed)
    n_samples = len(coordinator.window)
    while True:
        while coordinator.can_submit():
            coordinator.submit(space.sample(rng), n_samples, tag="0")
        if not coordinator.has_pending:
            break
        coordinator.next_result()
    champion = _champion_of(coordinator.completed)
    return _finalize("random", space, coordinator.window, schema, coordinator, champion)


def asha_rungs(window_length: int, eta: float = 2.0, n_rungs: int = 4,
               min_resource: Optional[int] = None) -> list[int]:
    """Geometric sample budgets, topping out at the full window."""
    if min_resource is not None:
        rungs = []
        r = min_resource
        while r < window_length:
            rungs.append(int(r))
            r = int(r * eta)
        rungs.append(window_length)
        return rungs
    return [max(1, int(round(window_length / eta ** k)))
            for k in range(n_rungs - 1, -1, -1)]


def run_asha(space: ConfigSpace, window, schema: StreamSchema, budget: SearchBudget,
             rng: np.random.Generator, eta: float = 2.0,
             min_resource: Optional[int] = None, metric_name: str = "accuracy",
             seed=None) -> SearchOutcome:
    """Asynchronous successive halving over window-prefix budgets.

    A candidate sits at one rung; once its score lands in the top 1/eta of the
    completed results at that rung it becomes promotable and is re-evaluated
    with the next rung's sample budget, without waiting for any cohort. The
    champion is the best top-rung finisher (falling back to best-anywhere).
    """
    coordinator = _Coordinator(window, schema, budget, metric_name, seed)
    rungs = asha_rungs(len(coordinator.window), eta=eta, min_resource=min_resource)
    top = len(rungs) - 1
    # Tags carry "rung:candidate". A candidate id names one sampled genotype
    # across its promotions.
    by_rung: list[list[tuple[int, EvaluationResult]]] = [[] for _ in rungs]
    promoted: list[set[int]] = [set() for _ in rungs]
    candidate_of: dict[int, PipelineGenotype] = {}

    def propose():
        for r in range(top - 1, -1, -1):
            finished = sorted(
                ((cand, res) for cand, res in by_rung[r] if not res.failed),
                key=lambda item: (-item[1].score, item[1].order),
            )
            n_promotable = int(len(finished) / eta)
            for cand, _res in finished[:n_promotable]:
                if cand not in promoted[r]:
                    promoted[r].add(cand)
                    return candidate_of[cand], rungs[r + 1], f"{r + 1}:{cand}"
        cand = len(candidate_of)
        candidate_of[cand] = space.sample(rng)
        return candidate_of[cand], rungs[0], f"0:{cand}"

    while True:
        while coordinator.can_submit():
            genotype, n_samples, tag = propose()
            coordinator.submit(genotype, n_samples, tag=tag)
        if not coordinator.has_pending:
            break
        result = coordinator.next_result()
        rung_index, cand = (int(part) for part in result.tag.split(":"))
        by_rung[rung_index].append((cand, result))

    champion = (_champion_of([res for _, res in by_rung[top]])
                or _champion_of(coordinator.completed))
    return _finalize("asha", space, coordinator.window, schema, coordinator, champion)


def run_async_ea(space: ConfigSpace, window, schema: StreamSchema,
                 budget: SearchBudget, rng: np.random.Generator,
                 population_size: int = 20, tournament_size: int = 3,
                 crossover_rate: float = 0.3, metric_name: str = "accuracy",
                 seed=None,
                 seed_genotypes: Sequence[PipelineGenotype] = ()) -> SearchOutcome:
    """Steady-state asynchronous evolution on the full window.

    Whenever a worker frees up it receives either a random initial member
    (until the population target is reached) or one offspring: crossover of
    two tournament winners with probability ``crossover_rate``, otherwise a
    mutation of one. An offspring replaces the current worst member only if
    it scores strictly better. The champion is the best ever evaluated.
    """
    if population_size < 2:
        raise ValueError("population_size must be >= 2")
    coordinator = _Coordinator(window, schema, budget, metric_name, seed)
    n_samples = len(coordinator.window)
    population: list[EvaluationResult] = []
    seeded = list(seed_genotypes)
    proposed_inits = 0

    def tournament() -> PipelineGenotype:
        contenders = [population[int(rng.integers(0, len(population)))]
                      for _ in range(min(tournament_size, len(population)))]
        return max(contenders, key=lambda res: res.score).genotype

    def propose():
        nonlocal proposed_inits
        if proposed_inits < population_size:
            proposed_inits += 1
            if seeded:
                return seeded.pop(0), "init"
            return space.sample(rng), "init"
        if len(population) >= 2 and rng.random() < crossover_rate:
            return space.crossover(tournament(), tournament(), rng), "offspring"
        if population:
            return space.mutate(tournament(), rng), "offspring"
        return space.sample(rng), "init"

    while True:
        while coordinator.can_submit():
            genotype, tag = propose()
            coordinator.submit(genotype, n_samples, tag=tag)
        if not coordinator.has_pending:
            break
        result = coordinator.next_result()
        if result.failed:
            continue
        if result.tag == "init" or len(population) < population_size:
            population.append(result)
        else:
            worst_index = min(range(len(population)),
                              key=lambda i: (population[i].score, -i))
            if result.score > population[worst_index].score:
                population[worst_index] = result
    champion = _champion_of(coordinator.completed)
    return _finalize("async_ea", space, coordinator.window, schema, coordinator, champion)


SEARCH_STRATEGIES = {
    "random": run_random_search,
    "asha": run_asha,
    "async_ea": run_async_ea,
}


def make_search(name: str) -> Callable:
    try:
        return SEARCH_STRATEGIES[name]
    except KeyError:
        raise ValueError(
            f"unknown search algorithm {name!r}; choose from {sorted(SEARCH_STRATEGIES)}"
        ) from None
