"""Experiment runners: stream assembly, single runs, baselines, comparisons.

A run writes four artifacts into its output directory: ``trace.csv`` (one row
per online sample), ``events.csv`` (drifts, retrains, searches, switches),
``search_log.csv`` (one row per candidate evaluation), and ``summary.json``
(final metrics plus the fully resolved configuration, so every run is
self-describing). ``compare`` executes several methods on the identical
stream realization and merges their curves into one long-format CSV.
"""

from __future__ import annotations

import json
import os
import time
from typing import Iterator, Optional

from driftml.config import split_pins, validate_settings
from driftml.detectors import DetectorVerdict
from driftml.evaluation import PrequentialMetric, RunTrace, TraceRow, make_metric
from driftml.learners.ensembles import LeveragingBagging
from driftml.learners.trees import (
    HoeffdingAdaptiveTreeClassifier,
    HoeffdingTreeClassifier,
)
from driftml.orchestrator import (
    ControllerConfig,
    EventRow,
    OnlineController,
    RunResult,
    write_events_csv,
    write_search_log_csv,
)
from driftml.search.space import ConfigSpace
from driftml.streams import (
    DriftSpec,
    HyperplaneConfig,
    Instance,
    SeaConfig,
    StreamSchema,
    generate_hyperplane,
    generate_sea,
    load_csv_stream,
)

METHOD_STRATEGY = {
    "oaml-basic": "Basic",
    "oaml-ensemble": "Ensemble",
    "oaml-modelstore": "ModelStore",
}


class ExperimentError(ValueError):
    """Configuration problems detected while assembling a run."""


def build_stream(settings: dict, seed: int):
    """Return (stream factory, schema, metadata) for the configured source."""
    kind = settings["stream"]
    stream_seed = settings.get("stream.seed")
    stream_seed = seed if stream_seed is None else int(stream_seed)
    length = int(settings["stream.length"])
    noise = float(settings["stream.noise"])

    if kind in ("sea", "sea-abrupt", "sea-mixed", "sea-cyclic"):
        if kind == "sea":
            schedule = ()
        elif kind == "sea-abrupt":
            position = settings.get("stream.drift_position") or length // 2
            schedule = (DriftSpec(position=int(position),
                                  width=int(settings["stream.drift_width"]),
                                  from_concept=int(settings["stream.from_concept"]),
                                  to_concept=int(settings["stream.to_concept"])),)
        elif kind == "sea-mixed":
            # Gradual drifts flank the central abrupt switch, proportioned as
            # in the full-scale streams (transition window = 20% of length).
            width = max(2, length // 5)
            schedule = (
                DriftSpec(position=length // 4, width=width, from_concept=1, to_concept=3),
                DriftSpec(position=length // 2, width=1, from_concept=3, to_concept=4),
                DriftSpec(position=3 * length // 4, width=width, from_concept=4, to_concept=2),
            )
        else:  # sea-cyclic: A -> B -> A
            schedule = (
                DriftSpec(position=length // 3, width=1, from_concept=1, to_concept=4),
                DriftSpec(position=2 * length // 3, width=1, from_concept=4, to_concept=1),
            )
        config = SeaConfig(
            length=length, seed=stream_seed, noise_rate=noise,
            concept_schedule=schedule,
            initial_concept=int(settings["stream.concept"]) if not schedule else schedule[0].from_concept,
        )
        metadata = {
            "kind": kind, "length": length, "noise_rate": noise, "seed": stream_seed,
            "schedule": [
                {"position": d.position, "width": d.width,
                 "from_concept": d.from_concept, "to_concept": d.to_concept}
                for d in schedule
            ],
        }
        return (lambda: generate_sea(config)), config.schema, metadata

    if kind == "hyperplane":
        config = HyperplaneConfig(
            length=length, seed=stream_seed,
            n_features=int(settings["stream.n_features"]),
            mag_change=float(settings["stream.mag_change"]),
            sigma=float(settings["stream.sigma"]),
            noise_rate=noise,
        )
        metadata = {
            "kind": kind, "length": length, "noise_rate": noise, "seed": stream_seed,
            "n_features": config.n_features, "mag_change": config.mag_change,
            "sigma": config.sigma,
        }
        return (lambda: generate_hyperplane(config)), config.schema, metadata

    if kind == "csv":
        path = settings.get("stream.path")
        if not path:
            raise ExperimentError("stream.path is required for stream=csv")
        classes = tuple(int(c) for c in str(settings["stream.classes"]).split(","))
        schema = StreamSchema(n_features=int(settings["stream.n_features"]),
                              class_labels=classes)
        has_header = bool(settings["stream.has_header"])
        metadata = {"kind": kind, "path": path, "n_features": schema.n_features,
                    "classes": list(schema.class_labels)}
        return (lambda: load_csv_stream(str(path), schema, has_header)), schema, metadata

    raise ExperimentError(f"unknown stream kind {kind!r}")


def controller_config_from(settings: dict) -> ControllerConfig:
    return ControllerConfig(
        n_0=int(settings["n_0"]),
        n_s=int(settings["n_s"]),
        t_max=float(settings["t_max"]) if settings["t_max"] is not None else None,
        max_train=(int(settings["max_train"])
                   if settings["max_train"] is not None else None),
        k=int(settings["k"]),
        strategy=METHOD_STRATEGY[settings["method"]],
        detector=str(settings["detector"]),
        search_algorithm=str(settings["search"]),
        metric=str(settings["metric"]),
        seed=int(settings["seed"]),
        async_search=bool(settings["async_search"]),
        max_evaluations=(int(settings["max_evaluations"])
                         if settings["max_evaluations"] is not None else None),
        worker_count=int(settings["workers"]),
        ea_population=int(settings["ea_population"]),
        ea_warm_start=bool(settings["ea_warm_start"]),
        train_inactive_models=bool(settings["train_inactive"]),
    )


def _pinned_space(settings: dict) -> ConfigSpace:
    space = ConfigSpace()
    for component, param, value in split_pins(settings):
        space.pin(component, param, value)
    return space


def _run_baseline(settings: dict, stream: Iterator[Instance],
                  schema: StreamSchema) -> RunResult:
    """Warm-train the baseline on the initial batch, then run it prequentially."""
    method = settings["method"]
    seed = int(settings["seed"])
    if method == "baseline-levbag":
        model = LeveragingBagging(
            schema.class_labels,
            base_factory=lambda: HoeffdingTreeClassifier(schema.class_labels),
            seed=seed,
        )
        name = "LeveragingBagging"
    else:
        model = HoeffdingAdaptiveTreeClassifier(schema.class_labels, seed=seed)
        name = "HoeffdingAdaptiveTree"

    n_0 = int(settings["n_0"])
    t0 = time.monotonic()
    trace = RunTrace(decimate_after=int(settings["trace_decimate_after"]),
                     decimate_step=int(settings["trace_decimate_step"]))
    metric = PrequentialMetric(metric=make_metric(str(settings["metric"])))
    online = 0
    warm = 0
    for instance in stream:
        if warm < n_0:
            model.learn_one(instance.features, instance.label)
            warm += 1
            continue
        online += 1
        prediction = model.predict_one(instance.features)
        metric.update(instance.label, prediction)
        model.learn_one(instance.features, instance.label)
        trace.append(TraceRow(
            index=instance.index, prediction=prediction, truth=instance.label,
            acc_cum=metric.accuracy, acc_win=metric.window_accuracy,
            verdict=str(DetectorVerdict.IN_CONTROL), source="Baseline",
            retrain=0, classifier=name,
        ))
    if warm < n_0:
        raise ExperimentError(f"stream shorter than the initial batch n_0={n_0}")
    if online == 0:
        raise ExperimentError("stream ended during the initial batch; nothing to run online")
    return RunResult(
        trace=trace, events=[], search_log=[], final_accuracy=metric.accuracy,
        drift_count=0, scheduled_retrain_count=0, model_switch_count=0,
        search_count=0, wall_clock=time.monotonic() - t0, online_samples=online,
    )


def run_settings(settings: dict) -> RunResult:
    """Execute one fully merged configuration and return its result."""
    problems = validate_settings(settings)
    if problems:
        raise ExperimentError("; ".join(problems))
    stream_factory, schema, _metadata = build_stream(settings, int(settings["seed"]))
    if settings["method"] in METHOD_STRATEGY:
        controller = OnlineController(
            controller_config_from(settings), schema, space=_pinned_space(settings)
        )
        controller.trace.decimate_after = int(settings["trace_decimate_after"])
        controller.trace.decimate_step = int(settings["trace_decimate_step"])
        return controller.run(stream_factory())
    return _run_baseline(settings, stream_factory(), schema)


def run_experiment(settings: dict, out_dir: str) -> dict:
    """Run and write trace/events/search-log/summary artifacts to ``out_dir``."""
    problems = validate_settings(settings)
    if problems:
        raise ExperimentError("; ".join(problems))
    os.makedirs(out_dir, exist_ok=True)
    stream_factory, schema, metadata = build_stream(settings, int(settings["seed"]))

    controller: Optional[OnlineController] = None
    try:
        if settings["method"] in METHOD_STRATEGY:
            controller = OnlineController(
                controller_config_from(settings), schema, space=_pinned_space(settings)
            )
            controller.trace.decimate_after = int(settings["trace_decimate_after"])
            controller.trace.decimate_step = int(settings["trace_decimate_step"])
            result = controller.run(stream_factory())
        else:
            result = _run_baseline(settings, stream_factory(), schema)
    except Exception:
        # Flush whatever trace exists so a failed run is still inspectable.
        if controller is not None:
            controller.trace.write_csv(os.path.join(out_dir, "trace.csv"))
            write_events_csv(controller.events, os.path.join(out_dir, "events.csv"))
        raise

    result.trace.write_csv(os.path.join(out_dir, "trace.csv"))
    write_events_csv(result.events, os.path.join(out_dir, "events.csv"))
    write_search_log_csv(result.search_log, os.path.join(out_dir, "search_log.csv"))
    summary = {
        "settings": {k: v for k, v in sorted(settings.items())},
        "stream": metadata,
        "result": result.summary(),
    }
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
    return summary


COMPARISON_HEADER = "index,method,acc_win,acc_cum"


def compare_experiments(settings_list: list[dict], shared_seed: int,
                        out_dir: str) -> dict:
    """Run every method on the identical stream realization and merge curves."""
    if len(settings_list) < 2:
        raise ExperimentError("compare needs at least two configurations")
    resolved = []
    for settings in settings_list:
        merged = dict(settings)
        merged["seed"] = shared_seed
        merged["stream.seed"] = shared_seed
        resolved.append(merged)
    stream_keys = [
        {k: v for k, v in s.items() if k.startswith("stream")} for s in resolved
    ]
    if any(keys != stream_keys[0] for keys in stream_keys[1:]):
        raise ExperimentError("compare requires identical stream specifications")

    os.makedirs(out_dir, exist_ok=True)
    report: dict = {"seed": shared_seed, "methods": {}}
    curves: list[tuple[int, str, float, float]] = []
    for settings in resolved:
        problems = validate_settings(settings)
        if problems:
            raise ExperimentError("; ".join(problems))
        result = run_settings(settings)
        method = settings["method"]
        report["methods"][method] = {
            **result.summary(),
        }
        for row in result.trace.rows:
            curves.append((row.index, method, row.acc_win, row.acc_cum))

    curve_path = os.path.join(out_dir, "comparison.csv")
    with open(curve_path, "w") as fh:
        fh.write(COMPARISON_HEADER + "\n")
        for index, method, acc_win, acc_cum in curves:
            fh.write(f"{index},{method},{acc_win:.6f},{acc_cum:.6f}\n")
    with open(os.path.join(out_dir, "compare_summary.json"), "w") as fh:
        json.dump(report, fh, indent=2)
    return report
