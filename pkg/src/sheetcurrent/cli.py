"""Command-line entry point: ``sheetcurrent <subcommand> [options]``.

Exit status: 0 when every check passes, 1 when any check or quadrature
tolerance fails, 2 on configuration or precondition errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import List, Optional

from .config import CRITERIA, SUBCOMMANDS, defaults_for, defaults_toml, load_config
from .errors import SheetCurrentError
from .experiments import run, run_all
from .rng import THREADS_ENV

EXIT_OK, EXIT_FAILED, EXIT_ERROR = 0, 1, 2


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v]


def _options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    add = common.add_argument
    hide = argparse.SUPPRESS
    add("--config", metavar="PATH", default=hide, help="TOML config file")
    add("--seed", type=int, metavar="U64", default=hide)
    add("--out", metavar="DIR", default=hide, help="output directory")
    add("--threads", type=int, metavar="K", default=hide, help=f"worker threads (default: ${THREADS_ENV} or CPU count)")
    add("--grid-sizes", dest="grid_sizes", type=_int_list, metavar="N,..", default=hide)
    add("--replicas", type=int, default=hide)
    add("--x-values", dest="x_values", type=_float_list, metavar="X,..", default=hide)
    add("--alpha", type=_float_list, metavar="A,..", default=hide)
    add("--r", type=_float_list, metavar="R,..", default=hide)
    add("--d", type=_int_list, metavar="D,..", default=hide)
    add("--m-max", dest="m_max", type=int, default=hide)
    add("--quad-order", dest="quad_order", type=int, default=hide)
    add("--weight-convention", dest="weight_convention", choices=["OnePlusM", "ThreePlusM"], default=hide)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _options()
    parser = argparse.ArgumentParser(
        prog="sheetcurrent",
        description="Reproducible experiments for stochastic currents over the Brownian sheet.",
        parents=[common],
    )
    parser.add_argument("--list", action="store_true", help="print the subcommand -> criterion map")
    parser.add_argument("--print-defaults", action="store_true", help="print every embedded default as TOML")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=f"acceptance criterion {CRITERIA[name]}")
    return parser


_NOT_CONFIG = {"config", "subcommand", "list", "print_defaults"}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.list:
        for name in SUBCOMMANDS:
            print(f"{name}\tcriterion {CRITERIA[name]}")
        return EXIT_OK
    if args.print_defaults:
        sys.stdout.write(defaults_toml())
        return EXIT_OK
    if not args.subcommand:
        parser.print_usage(sys.stderr)
        return EXIT_ERROR
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    try:
        sections = load_config(args.config) if hasattr(args, "config") else {}
        if args.subcommand == "report":
            rep = run_all(sections, overrides)
        else:
            shared = dict(sections.get("shared", {}))
            shared.update(overrides)
            rep = run(defaults_for(args.subcommand, shared, sections.get(args.subcommand)))
    except (SheetCurrentError, ValueError, IndexError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for row in rep.sorted_rows():
        print(f"[{row.status}] {row.label}" + ("" if row.size is None else f" (size {row.size})"))
    print(f"{args.subcommand}: {'pass' if rep.passed else 'FAIL'} ({rep.wall_time:.1f} s)")
    return EXIT_OK if rep.passed else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
