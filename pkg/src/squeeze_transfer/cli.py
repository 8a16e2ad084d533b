"""Command-line front end.

    squeeze-transfer run CONFIG.json
    squeeze-transfer fig ID [--out DIR] [--max-n K]
    squeeze-transfer qfi --n N --r R --method M [--json]

Exit codes: 0 success, 1 some rows failed, 2 configuration or domain error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import analytics
from .config import load_config
from .errors import ArgumentError, ConfigError, NumericalError
from .figures import FIGURE_IDS, run_figure
from .sweep import CSV_FIELDS, rows_to_csv, run_scenario, write_rows

EXIT_OK, EXIT_PARTIAL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    rows = run_scenario(cfg)
    if cfg.output:
        for path in write_rows(rows, cfg.output):
            print(f"wrote {path}", file=sys.stderr)
    else:
        sys.stdout.write(rows_to_csv(rows))
    failed = [r for r in rows if not r.ok]
    for r in failed:
        print(f"row N={r.N} r={r.r} method={r.method}: {r.error}", file=sys.stderr)
    if failed and len(failed) == len(rows):
        numeric = all("NumericalError" in r.error or "IntegratorError" in r.error for r in failed)
        return EXIT_NUMERIC if numeric else EXIT_CONFIG
    return EXIT_PARTIAL if failed else EXIT_OK


def _cmd_fig(args) -> int:
    res = run_figure(args.id, args.out, args.max_n)
    print(f"figure {args.id}: {len(res.rows)} rows, schema {','.join(CSV_FIELDS)}")
    for sub in res.substitutions:
        print(f"  desk-scale substitution: {sub}")
    for path in res.paths:
        print(f"  wrote {path}")
    return EXIT_PARTIAL if res.failed else EXIT_OK


def _cmd_qfi(args) -> int:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = analytics.qfi(args.n, args.r, args.method)
    if args.json:
        payload = {"N": args.n, "r": args.r, "method": res.method, "qfi": res.value,
                   "terms": res.terms, "warnings": [str(w.message) for w in caught]}
        print(json.dumps(payload, indent=1))
    else:
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        print(repr(res.value))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="squeeze-transfer",
                                description="Adiabatic phonon-to-spin squeezing transfer toolkit")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario config (JSON)")
    run.add_argument("config", type=Path)
    run.set_defaults(func=_cmd_run)

    fig = sub.add_parser("fig", help="regenerate a figure preset as CSV")
    fig.add_argument("id", choices=FIGURE_IDS)
    fig.add_argument("--out", default=".", type=Path)
    fig.add_argument("--max-n", type=int, default=None)
    fig.set_defaults(func=_cmd_fig)

    q = sub.add_parser("qfi", help="evaluate the QFI of the transferred state")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--method", choices=analytics.METHODS, default="direct_sum")
    q.add_argument("--json", action="store_true")
    q.set_defaults(func=_cmd_qfi)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_CONFIG
    except ArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
