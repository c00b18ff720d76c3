"""Command line entry point: ``speclab run``, ``speclab zoo list``, ``speclab version``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigInvalid, NoConvergence, SpeclabError
from .opzoo import zoo
from .runner import FORMATS, dumps_table, load_config, run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def zoo_list() -> str:
    lines = []
    for gen in zoo():
        params = ", ".join(f"{k}={v}" for k, v in gen.params.items()) or "-"
        if gen.known_spectrum is None:
            spec = "unknown"
        elif gen.known_spectrum == ((0j, 0),):
            spec = "{0}"
        else:
            head = ", ".join(f"{z.real:g}" if z.imag == 0 else f"{z:g}" for z, _ in gen.known_spectrum[:4])
            spec = "{" + head + (", ...}" if len(gen.known_spectrum) > 4 else "}")
        lines.append(f"{gen.name}\t{gen.compactness_class}\tparams: {params}\tspectrum: {spec}")
    return "\n".join(lines)


def _cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    fmt = args.format or cfg.output["format"]
    target = args.out or cfg.output["path"]
    try:
        outcome = run(cfg)
    except ConfigInvalid as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoConvergence as exc:
        print(f"{cfg.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (SpeclabError, ValueError) as exc:
        print(f"{cfg.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = dumps_table(outcome.table, fmt)
    try:
        if target:
            Path(target).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    where = target or "stdout"
    note = f" ({outcome.message})" if outcome.message else ""
    print(f"{cfg.experiment}: {len(outcome.table.rows)} rows -> {where} [{outcome.status}]{note}", file=sys.stderr)
    return EXIT_NUMERICAL if outcome.status == "flagged" else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speclab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one experiment from a JSON config")
    p_run.add_argument("config", help="path to the experiment config")
    p_run.add_argument("--out", help="output path (overrides output.path; default stdout)")
    p_run.add_argument("--format", choices=FORMATS, help="csv tables or line-delimited records")
    p_zoo = sub.add_parser("zoo", help="operator catalogue")
    p_zoo.add_argument("action", choices=["list"])
    sub.add_parser("version", help="print the version")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "zoo":
        print(zoo_list())
        return EXIT_OK
    print(__version__)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
