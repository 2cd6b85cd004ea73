"""``weakmeas`` command line.

Exit status is 0 on success.  Failures print one JSON object
``{"error": <class>, "messages": [...]}`` on stderr and exit with
2 (config), 3 (engine) or 4 (I/O).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .config import ConfigError, SamplingConfig, load_config
from .runner import EngineError, emit, run_experiment, summarize

EXIT_CONFIG, EXIT_ENGINE, EXIT_IO = 2, 3, 4


def _fail(kind: str, messages: list[str], code: int) -> int:
    print(json.dumps({"error": kind, "messages": messages}), file=sys.stderr)
    return code


def _load(path: str):
    try:
        return load_config(path)
    except OSError as exc:
        raise _Exit(_fail("IOError", [f"{path}: {exc.strerror or exc}"], EXIT_IO))
    except ConfigError as exc:
        raise _Exit(_fail("ConfigError", exc.errors, EXIT_CONFIG))


class _Exit(Exception):
    def __init__(self, code: int):
        self.code = code


def cmd_validate(args) -> int:
    cfg = _load(args.config)
    print(f"ok: {cfg.experiment} config is valid")
    return 0


def cmd_run(args) -> int:
    cfg = _load(args.config)
    if args.seed is not None:
        if cfg.sampling is None:
            print("note: --seed ignored, experiment does not sample", file=sys.stderr)
        else:
            cfg = dataclasses.replace(cfg, sampling=SamplingConfig(
                cfg.sampling.shots, args.seed, cfg.sampling.repeats))
    fmt = args.format or cfg.output_format
    path = args.output or cfg.output_path or "-"
    try:
        table = run_experiment(cfg)
    except EngineError as exc:
        return _fail("EngineError", [str(exc)], EXIT_ENGINE)
    if args.seed is not None:
        table.metadata["seed_override"] = args.seed
    try:
        emit(table, fmt, path)
    except OSError as exc:
        return _fail("IOError", [str(exc)], EXIT_IO)
    print(summarize(table), file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="weakmeas", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment config")
    run.add_argument("config")
    run.add_argument("--output", help="output path ('-' for stdout)")
    run.add_argument("--format", choices=("csv", "json"))
    run.add_argument("--seed", type=int, help="override [sampling] seed")
    run.set_defaults(func=cmd_run)
    val = sub.add_parser("validate", help="validate a config without running it")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Exit as exc:
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
