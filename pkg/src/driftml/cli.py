"""Command-line interface: run one experiment, compare methods, validate configs.

Exit codes: 0 success, 1 runtime failure, 2 configuration error. The default
output directory comes from --out, falling back to the DRIFTML_OUT environment
variable, then ./driftml-out.
"""

from __future__ import annotations

import argparse
import os
import sys

from driftml.config import (
    ConfigFileError,
    load_config_file,
    merge_settings,
    validate_settings,
)
from driftml.experiments import ExperimentError, compare_experiments, run_experiment
from driftml.presets import PRESETS

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

OUT_ENV_VAR = "DRIFTML_OUT"


def _default_out() -> str:
    return os.environ.get(OUT_ENV_VAR, "driftml-out")


def _resolve_layers(preset: str | None, config_path: str | None) -> dict:
    layers = []
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigFileError(
                f"unknown preset {preset!r}; available: {', '.join(sorted(PRESETS))}"
            )
        layers.append(PRESETS[preset])
    if config_path is not None:
        layers.append(load_config_file(config_path))
    if not layers:
        raise ConfigFileError("provide --config and/or --preset")
    return merge_settings(*layers)


def _apply_cli_overrides(settings: dict, args) -> dict:
    if getattr(args, "seed", None) is not None:
        settings["seed"] = args.seed
    if getattr(args, "workers", None) is not None:
        settings["workers"] = args.workers
    return settings


def _load_one(entry: str) -> dict:
    """A compare entry is either a config-file path or a preset name."""
    if entry in PRESETS:
        return merge_settings(PRESETS[entry])
    return merge_settings(load_config_file(entry))


def cmd_run(args) -> int:
    try:
        settings = _apply_cli_overrides(_resolve_layers(args.preset, args.config), args)
        problems = validate_settings(settings)
        if problems:
            for problem in problems:
                print(f"config error: {problem}", file=sys.stderr)
            return EXIT_CONFIG
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or _default_out()
    try:
        summary = run_experiment(settings, out_dir)
    except ExperimentError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    result = summary["result"]
    print(f"method={settings['method']} stream={settings['stream']} "
          f"seed={settings['seed']}")
    print(f"final_accuracy={result['final_accuracy']:.4f} "
          f"drifts={result['drift_count']} switches={result['model_switch_count']} "
          f"searches={result['search_count']}")
    print(f"artifacts written to {out_dir}/")
    return EXIT_OK


def cmd_compare(args) -> int:
    try:
        specs = [s.strip() for s in args.configs.split(",") if s.strip()]
        settings_list = [_load_one(entry) for entry in specs]
        for settings in settings_list:
            problems = validate_settings(settings)
            if problems:
                for problem in problems:
                    print(f"config error: {problem}", file=sys.stderr)
                return EXIT_CONFIG
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = args.out or _default_out()
    try:
        report = compare_experiments(settings_list, args.seed, out_dir)
    except ExperimentError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"compare failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    for method, stats in report["methods"].items():
        print(f"{method}: final_accuracy={stats['final_accuracy']:.4f} "
              f"drifts={stats['drift_count']}")
    print(f"curves written to {out_dir}/comparison.csv")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        settings = _resolve_layers(args.preset, args.config)
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    problems = validate_settings(settings)
    if problems:
        for problem in problems:
            print(f"violation: {problem}")
        return EXIT_CONFIG
    print("config ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="driftml",
        description="Continuously re-optimized online learning pipelines under drift",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment")
    run.add_argument("--config", help="config file (key = value lines)")
    run.add_argument("--preset", help=f"preset name ({', '.join(sorted(PRESETS))})")
    run.add_argument("--seed", type=int, help="override the run seed")
    run.add_argument("--workers", type=int, help="search worker count")
    run.add_argument("--out", help="output directory")
    run.set_defaults(func=cmd_run)

    compare = sub.add_parser("compare", help="run several methods on one stream")
    compare.add_argument("--configs", required=True,
                         help="comma-separated config paths and/or preset names")
    compare.add_argument("--seed", type=int, required=True,
                         help="shared seed for the stream realization")
    compare.add_argument("--out", help="output directory")
    compare.set_defaults(func=cmd_compare)

    validate = sub.add_parser("validate", help="check a config without running")
    validate.add_argument("--config", help="config file")
    validate.add_argument("--preset", help="preset name")
    validate.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
