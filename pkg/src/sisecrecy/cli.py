"""Command-line front end: ``sisecrecy sweep`` and ``sisecrecy figure``.

Exit codes: 0 success, 2 configuration error, 3 closed form and
quadrature disagree on a row that carries no validity warning.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .sweep import (
    CONCORDANCE_TOL,
    PRESETS,
    ConfigError,
    flag_discrepancies,
    gate_spec,
    parse_config,
    preset_figure,
    run_sweep,
    summarize,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GATE = 3

log = logging.getLogger("sisecrecy")


def _build_parser():
    p = argparse.ArgumentParser(prog="sisecrecy", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--mc-n", type=int, dest="mc_n")
        sp.add_argument("--workers", type=int, default=1, help="threads for sweep points")
        sp.add_argument("--validate", action="store_true",
                        help="run only the closed-form vs quadrature gate")
        sp.add_argument("--sop-piecewise", action="store_true", dest="sop_piecewise",
                        help="use the exact SOP closed form when the threshold constant is negative")

    sw = sub.add_parser("sweep", help="run a sweep described by a config file")
    sw.add_argument("--config", type=Path, required=True)
    common(sw)

    fg = sub.add_parser("figure", help="run a figure preset")
    fg.add_argument("name", choices=PRESETS + ("all",))
    common(fg)
    return p


def _run_one(spec, args, label, out_stream):
    if args.validate:
        spec = gate_spec(spec)
    rows = run_sweep(spec, workers=max(1, args.workers))
    rows, bad = flag_discrepancies(rows, CONCORDANCE_TOL)
    if out_stream is not None:
        write_csv(rows, spec, out_stream)
    log.info("%s: %d rows %s", label, len(rows), summarize(rows))
    if bad:
        log.error("%s: %d closed-form rows disagree with quadrature by more than %g",
                  label, bad, CONCORDANCE_TOL)
    return bad


def main(argv=None):
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if (args.verbose or args.validate) else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    overrides = {"seed": args.seed, "mc_n": args.mc_n, "sop_piecewise": args.sop_piecewise or None}
    try:
        if args.command == "sweep":
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            jobs = [(str(args.config), parse_config(text, overrides))]
        else:
            names = PRESETS if args.name == "all" else (args.name,)
            jobs = []
            for name in names:
                spec = preset_figure(name)
                spec = replace(spec, **{k: v for k, v in overrides.items() if v is not None})
                jobs.append((name, spec))
        if args.out is not None and len(jobs) > 1 and not args.validate:
            raise ConfigError("--out takes a single preset; run presets one at a time")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    bad = 0
    try:
        for label, spec in jobs:
            if args.validate and args.out is None:
                bad += _run_one(spec, args, label, None)
            elif args.out is not None:
                with open(args.out, "w", newline="") as fh:
                    bad += _run_one(spec, args, label, fh)
            else:
                bad += _run_one(spec, args, label, sys.stdout)
    except BrokenPipeError:
        # downstream closed early (e.g. `| head`); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    if args.validate and not bad:
        log.info("validation passed")
    return EXIT_GATE if bad else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
