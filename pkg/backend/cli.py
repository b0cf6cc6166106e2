#!/usr/bin/env python3
"""
operad-forge command line.

    python backend/cli.py dims --family tHyperCom --max-arity 6
    python backend/cli.py groebner relations.txt --max-arity 4
    python backend/cli.py dual relations.txt --max-arity 3
    python backend/cli.py homology dg.txt --arity 2 --low 0 --high 4
    python backend/cli.py verify --family blmHyperComDual --k 3 --max-arity 8
    python backend/cli.py verify-all --quick

Standard output carries the report only; progress goes to standard error.
Exit status: 0 when every verdict holds, 1 when one fails, 2 on usage errors.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from core.battery import dg_homology_table, dimension_table, verify_all, verify_family
from core.catalog import FamilyId, build
from core.config import Settings, get_settings
from core.dsl import format_presentation, parse_presentation
from core.errors import DifferentialError, OperadForgeError, TruncationError
from core.koszul import DEFAULT_DUAL_ORDER, check_square_zero, complex_slice, ql_dual_dg, quadratic_dual_desuspended
from core.presentation import Presentation
from core.reports import FORMATS, DimensionTable, Report, render, write_report
from core.result_store import ResultStore
from core.rewriting import weight_bound_for_window

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=FORMATS, default="text", help="report format")
    common.add_argument("--order", help="monomial order, overriding the presentation's")
    common.add_argument("--out", help="write the report to this path instead of stdout")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the Hilbert table cache")

    source = _Parser(add_help=False)
    source.add_argument("file", nargs="?", help="presentation file")
    source.add_argument("--family", help="catalog family instead of a file")
    source.add_argument("--k", type=int, help="order parameter of the b-families")
    source.add_argument("--max-arity", type=int, help="arity truncation")
    source.add_argument("--max-degree", type=int, help="degree truncation")

    parser = _Parser(prog="operad-forge", description="Gröbner bases and Koszul duality for twisted algebras and operads")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    commands.add_parser("dims", parents=[common, source], help="dimension table of a presentation")
    commands.add_parser("groebner", parents=[common, source], help="complete and print a Gröbner basis")
    dual = commands.add_parser("dual", parents=[common, source], help="Koszul dual presentation")
    dual.add_argument("--no-check", action="store_true", help="skip the d^2 = 0 check of dg duals")
    homology = commands.add_parser("homology", parents=[common, source], help="homology of a dg presentation slice")
    homology.add_argument("--arity", type=int, required=True)
    homology.add_argument("--low", type=int, default=0)
    homology.add_argument("--high", type=int, default=4)
    homology.add_argument("--slice-out", help="write the slice matrices in row col num/den format")
    commands.add_parser("verify", parents=[common, source], help="verify a catalog family")
    everything = commands.add_parser("verify-all", parents=[common], help="run the whole verification battery")
    everything.add_argument("--quick", action="store_true", help="small truncations only")
    return parser


def _family(args) -> FamilyId:
    if not args.family:
        raise UsageError("--family is required")
    return FamilyId(args.family, args.k, args.max_arity, args.max_degree).validate()


def _presentation(args, settings: Settings) -> Presentation:
    if args.file and args.family:
        raise UsageError("give either a presentation file or --family, not both")
    if args.family:
        return build(_family(args), settings)
    if not args.file:
        raise UsageError("a presentation file or --family is required")
    path = Path(args.file)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    return parse_presentation(path.read_text(encoding="utf-8"))


def _max_arity(args, p: Presentation, settings: Settings) -> int:
    return args.max_arity if args.max_arity is not None else settings.max_arity_for(p.kind)


def _order(args, p: Presentation) -> str:
    # any admissible order computes the dimensions of a free object
    return args.order or p.order or DEFAULT_DUAL_ORDER[p.kind]


def _arguments(args) -> dict:
    skip = {"command", "format", "out", "no_cache", "slice_out"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip and v is not None and v is not False}


def cmd_dims(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    report = Report(command="dims", arguments=_arguments(args))
    if args.family:
        fid = _family(args).resolved(settings)
        table, _ = dimension_table(fid, settings, store, args.order)
        report.truncation = {"max_arity": fid.max_arity, "max_degree": fid.max_degree}
    else:
        p = _presentation(args, settings)
        max_arity = _max_arity(args, p, settings)
        basis = p.basis(max_arity, order=_order(args, p), max_degree=args.max_degree)
        graded = basis.hilbert_table(max_weight=basis.max_weight)
        table = DimensionTable(label=p.name or args.file, graded={n: dict(c) for n, c in graded.items()})
        report.truncation = {"max_arity": max_arity, "max_degree": args.max_degree}
    report.tables.append(table)
    return report


def cmd_groebner(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    p = _presentation(args, settings)
    max_arity = _max_arity(args, p, settings)
    if args.family:
        fid = _family(args).resolved(settings)
        max_degree = fid.max_degree if fid.degree_truncated else None
    else:
        max_degree = args.max_degree
    basis = p.basis(max_arity, order=_order(args, p), max_degree=max_degree)
    report = Report(command="groebner", arguments=_arguments(args), truncation={"max_arity": max_arity, "max_degree": max_degree})
    lines = [basis.free.format_element(e) for e in basis.elements()]
    report.body = "\n".join(lines + ["", basis.completion_log()]).rstrip("\n")
    failures = basis.verify_confluence()
    report.add_verdict(
        "confluence",
        not failures,
        f"{len(basis)} elements, {basis.new_count} added by completion",
        {"failing": [basis.free.format_element(e) for e in failures]} if failures else None,
    )
    return report


def cmd_dual(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    p = _presentation(args, settings)
    max_arity = _max_arity(args, p, settings)
    if p.is_quadratic():
        dual = quadratic_dual_desuspended(p, max_arity, order=args.order)
    else:
        dual = ql_dual_dg(p, max_arity, order=args.order, check=not args.no_check)
    report = Report(command="dual", arguments=_arguments(args), truncation={"max_arity": max_arity})
    report.body = format_presentation(dual)
    return report


def cmd_homology(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    p = _presentation(args, settings)
    if not p.differential:
        raise UsageError("the presentation has no differential")
    report = Report(
        command="homology",
        arguments=_arguments(args),
        truncation={"arity": args.arity, "low": args.low, "high": args.high},
    )
    try:
        found = dg_homology_table(p, args.arity, args.low, args.high)
        report.add_verdict("d^2 = 0", True)
    except DifferentialError as e:
        report.add_verdict("d^2 = 0", False, str(e), e.slice_info)
        return report
    report.tables.append(DimensionTable(label=f"H({p.name or args.file or args.family})", graded={args.arity: found}))
    if args.slice_out:
        bound = weight_bound_for_window(p.free, args.arity, args.low - 1, args.high + 1)
        piece = complex_slice(p, p.basis(max(args.arity, 1), max_weight=bound + 1), args.arity, args.low, args.high)
        check_square_zero(piece)
        Path(args.slice_out).write_text(piece.to_text(), encoding="utf-8")
    return report


def cmd_verify(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    return verify_family(_family(args), settings, store, args.order)


def cmd_verify_all(args, settings: Settings, store: Optional[ResultStore]) -> Report:
    return verify_all(settings, store, quick=args.quick)


COMMANDS = {
    "dims": cmd_dims,
    "groebner": cmd_groebner,
    "dual": cmd_dual,
    "homology": cmd_homology,
    "verify": cmd_verify,
    "verify-all": cmd_verify_all,
}


def run(argv: Optional[List[str]] = None, settings: Optional[Settings] = None) -> int:
    """Parse argv, run one command, write its report and return the exit status"""
    try:
        settings = settings or get_settings()
        args = build_parser().parse_args(argv)
    except (UsageError, OperadForgeError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    store = None if args.no_cache else ResultStore.from_settings(settings)
    try:
        report = COMMANDS[args.command](args, settings, store)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, DifferentialError) as e:
        logger.error(f"{args.command} failed: {e}")
        report = Report(command=args.command, arguments=_arguments(args))
        report.add_verdict(args.command, False, str(e), getattr(e, "slice_info", None))
    except OperadForgeError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    write_report(render(report, args.format), args.out)
    return EXIT_OK if report.ok else EXIT_FAILED


def main() -> None:
    level = os.environ.get("OPFORGE_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    sys.exit(run())


if __name__ == "__main__":
    main()
