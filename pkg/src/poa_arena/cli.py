"""Command-line entry point.

Exit status: 0 success, 1 invalid input (missing file, bad JSON, schema
violation, bad flags), 2 internal error. Nothing is written to the output
when the status is nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import scenarios
from .scenarios import ConfigError

EXIT_OK, EXIT_INVALID, EXIT_INTERNAL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2), which we reserve
        raise UsageError(message)


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="poa-arena", description="PoA / PoW / PoS consensus simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, config: bool):
        if config:
            p.add_argument("--config", action="append", default=[], metavar="PATH", help="scenario JSON file")
        p.add_argument("--seed", type=_seed, help="override the config seed")
        p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")

    run = sub.add_parser("run", help="run one scenario")
    common(run, config=True)
    run.add_argument("--event-log", metavar="PATH", help="write one JSON line per dispatched event")

    cmp_ = sub.add_parser("compare", help="run several scenarios over repeated seeds")
    common(cmp_, config=True)
    cmp_.add_argument("--repetitions", type=_positive, default=1)

    attack = sub.add_parser("attack", help="run a named attack preset")
    attack.add_argument("preset", choices=scenarios.ATTACK_NAMES)
    common(attack, config=False)
    attack.add_argument("--sealers", type=_positive, default=7, help="authority set size")
    attack.add_argument("--slots", type=_positive, default=500)

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", action="append", default=[], metavar="PATH")

    sub.add_parser("presets", help="list attack preset names")
    return parser


def _render_reports(reports, fmt: str) -> str:
    if fmt == "csv":
        return scenarios.reports_to_csv(reports)
    if len(reports) == 1:
        return reports[0].to_json() + "\n"
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"


def _execute(args) -> str:
    if args.command == "presets":
        return "".join(name + "\n" for name in scenarios.ATTACK_NAMES)

    if args.command == "validate":
        if len(args.config) != 1:
            raise UsageError("validate takes exactly one --config")
        scenarios.load_config(args.config[0])
        return f"ok: {args.config[0]}\n"

    if args.command == "attack":
        cfg = scenarios.preset(args.preset, n=args.sealers, slots=args.slots)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        return _render_reports([scenarios.run_scenario(cfg)], args.format)

    if args.command == "run":
        if len(args.config) != 1:
            raise UsageError("run takes exactly one --config")
        cfg = scenarios.load_config(args.config[0])
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        if args.event_log:
            with open(args.event_log, "w", encoding="utf-8") as fh:
                report = scenarios.run_scenario(cfg, log_sink=lambda line: fh.write(line + "\n"))
        else:
            report = scenarios.run_scenario(cfg)
        return _render_reports([report], args.format)

    # compare
    if len(args.config) < 2:
        raise UsageError("compare takes at least two --config")
    configs = [scenarios.load_config(p) for p in args.config]
    if args.seed is not None:
        configs = [c.with_seed(args.seed) for c in configs]
    rows = scenarios.compare(configs, args.repetitions)
    if args.format == "csv":
        return scenarios.comparison_to_csv(rows)
    return scenarios.comparison_to_json(rows) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = _execute(args)
    except (UsageError, ConfigError, FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"poa-arena: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        print(f"poa-arena: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL

    out = getattr(args, "out", None)
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"poa-arena: error: cannot write {out}: {exc}", file=sys.stderr)
            return EXIT_INVALID
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
