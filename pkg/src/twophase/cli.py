"""``twophase`` command line.

    twophase <kind> --config cfg.json [--out DIR] [--seed N]
    twophase run --preset NAME [--out DIR] [--seed N]
    twophase presets

Exit status: 0 when every check passes, 1 when a check fails, 2 for a bad
configuration.
"""
from __future__ import annotations

import argparse
import sys

from .config import KINDS, load_config, validate
from .errors import ConfigError, TwoPhaseError
from .experiments import run
from .presets import get_preset, list_presets

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _parser():
    parser = argparse.ArgumentParser(prog="twophase", description="Two-phase conductor experiments")
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("presets", help="list the named configurations")
    for name in ("run",) + KINDS:
        p = sub.add_parser(name, help="run a preset or config file" if name == "run" else f"{name} experiment")
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", help="JSON configuration file")
        src.add_argument("--preset", help="name of a built-in configuration")
        p.add_argument("--out", help="directory for report.json and data files")
        p.add_argument("--seed", type=_seed, help="seed for randomized batteries (u64)")
        p.add_argument("--quiet", action="store_true", help="print only the verdict")
    return parser


def _print_presets(stream):
    names = list_presets()
    width = max(len(n) for n, _ in names)
    for name, desc in names:
        stream.write(f"{name:<{width}}  {desc}\n")


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    if args.command in (None, "presets"):
        _print_presets(sys.stdout)
        return EXIT_OK
    try:
        if args.preset:
            config = validate(get_preset(args.preset))
            config.setdefault("name", args.preset)
        else:
            config = load_config(args.config)
        if args.command != "run" and config["kind"] != args.command:
            raise ConfigError(f"config kind {config['kind']!r} does not match subcommand {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        report = run(config, out_dir=args.out, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TwoPhaseError as exc:
        print(f"{config['kind']} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if not args.quiet:
        for c in report.checks:
            mark = "PASS" if c.passed else "FAIL"
            print(f"{mark}  {c.name}: {c.value:.6g} {c.op} {c.threshold:g}")
    print(f"{config.get('name', config['kind'])}: {'PASS' if report.passed else 'FAIL'} "
          f"({len(report.checks)} checks, {report.wall_clock_s:.1f} s)")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
