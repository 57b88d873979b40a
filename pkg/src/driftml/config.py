"""Flat key=value experiment configs: parsing, merging, validation.

A config file is plain text, one ``key = value`` per line, ``#`` comments.
Dotted keys group related settings (``stream.length``, ``pin.HAT.grace_period``).
Values are auto-typed: int, float, true/false, or string. Every setting has a
default mirroring the standard run configuration, so an empty config is valid.
"""

from __future__ import annotations

import os

from driftml.search.space import ConfigSpace

METHODS = (
    "oaml-basic",
    "oaml-ensemble",
    "oaml-modelstore",
    "baseline-levbag",
    "baseline-hat",
)

STREAM_KINDS = ("sea", "sea-abrupt", "sea-mixed", "sea-cyclic", "hyperplane", "csv")

DEFAULT_SETTINGS: dict = {
    "method": "oaml-ensemble",
    "stream": "sea-abrupt",
    "stream.length": 20_000,
    "stream.noise": 0.10,
    "stream.seed": None,        # falls back to the run seed
    "stream.concept": 1,
    "stream.drift_position": None,  # default: mid-stream
    "stream.drift_width": 1,
    "stream.from_concept": 3,
    "stream.to_concept": 4,
    "stream.n_features": 10,
    "stream.mag_change": 0.001,
    "stream.sigma": 0.1,
    "stream.path": None,
    "stream.classes": "0,1",
    "stream.has_header": False,
    "n_0": 5000,
    "n_s": 5000,
    "t_max": 600.0,
    "max_train": 50_000,
    "k": 5,
    "detector": "EDDM",
    "search": "async_ea",
    "metric": "accuracy",
    "seed": 0,
    "workers": 1,
    "max_evaluations": None,
    "async_search": False,
    "ea_population": 20,
    "ea_warm_start": False,
    "train_inactive": False,
    "trace_decimate_after": 100_000,
    "trace_decimate_step": 10,
}


class ConfigFileError(ValueError):
    """Unparseable or structurally invalid config file."""


def _parse_value(raw: str):
    raw = raw.strip()
    lowered = raw.lower()
    if lowered in ("true", "yes", "on"):
        return True
    if lowered in ("false", "no", "off"):
        return False
    if lowered in ("none", "null", ""):
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def parse_config_text(text: str, origin: str = "<config>") -> dict:
    settings: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigFileError(f"{origin}:{lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        settings[key.strip()] = _parse_value(raw)
    return settings


def load_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigFileError(f"config file not found: {path}")
    with open(path) as fh:
        return parse_config_text(fh.read(), origin=path)


def merge_settings(*layers: dict) -> dict:
    """Later layers override earlier ones; defaults sit at the bottom."""
    merged = dict(DEFAULT_SETTINGS)
    for layer in layers:
        for key, value in layer.items():
            merged[key] = value
    return merged


def split_pins(settings: dict) -> list[tuple[str, str, object]]:
    """Extract ``pin.<Component>.<param> = value`` entries."""
    pins = []
    for key, value in settings.items():
        if not key.startswith("pin."):
            continue
        parts = key.split(".")
        if len(parts) != 3:
            pins.append(("?", key, value))
            continue
        pins.append((parts[1], parts[2], value))
    return pins


def validate_settings(settings: dict) -> list[str]:
    """All conformance violations, empty when the config is runnable."""
    problems: list[str] = []
    unknown = [
        key for key in settings
        if key not in DEFAULT_SETTINGS and not key.startswith("pin.")
    ]
    for key in unknown:
        problems.append(f"unknown setting {key!r}")

    method = settings.get("method")
    if method not in METHODS:
        problems.append(f"method={method!r} not one of {METHODS}")
    stream = settings.get("stream")
    if stream not in STREAM_KINDS:
        problems.append(f"stream={stream!r} not one of {STREAM_KINDS}")

    n_0, n_s = settings.get("n_0"), settings.get("n_s")
    if isinstance(n_0, int) and isinstance(n_s, int) and n_0 < n_s:
        problems.append(f"n_0 ({n_0}) >= n_s ({n_s}) required")
    noise = settings.get("stream.noise")
    if isinstance(noise, (int, float)) and not 0 <= noise < 0.5:
        problems.append(f"stream.noise={noise} must lie in [0, 0.5)")
    if settings.get("detector") not in ("DDM", "EDDM", "ADWIN", "none"):
        problems.append(f"detector={settings.get('detector')!r} unknown")
    if settings.get("search") not in ("random", "asha", "async_ea"):
        problems.append(f"search={settings.get('search')!r} unknown")
    if settings.get("metric") not in ("accuracy", "balanced_accuracy", "f1"):
        problems.append(f"metric={settings.get('metric')!r} unknown")
    if settings.get("k") is not None and settings.get("k", 1) < 1:
        problems.append("k must be >= 1")
    if settings.get("workers", 1) < 1:
        problems.append("workers must be >= 1")
    if settings.get("ea_population", 2) < 2:
        problems.append("ea_population must be >= 2")
    t_max = settings.get("t_max")
    max_evals = settings.get("max_evaluations")
    if t_max is None and max_evals is None:
        problems.append("one of t_max / max_evaluations must be set")

    if stream == "csv":
        path = settings.get("stream.path")
        if not path:
            problems.append("stream.path is required for stream=csv")
        elif not os.path.exists(str(path)):
            problems.append(f"stream.path does not exist: {path}")

    space = ConfigSpace()
    for component, param, value in split_pins(settings):
        if component == "?":
            problems.append(f"malformed pin key {param!r} (use pin.<Component>.<param>)")
            continue
        violation = space.check_pin(component, param, value)
        if violation:
            problems.append(violation)
    return problems
