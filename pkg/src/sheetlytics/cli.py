"""Command-line entry point: ``sheetlytics run|eval|check``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .address import parse_address
from .errors import SheetError
from .fileformat import read_spec, read_workbook
from .report import run_block, write_result
from .values import display
from .workbook import Formula, RoleKind

EXIT_OK, EXIT_BLOCK_FAILED, EXIT_USAGE = 0, 1, 2
FORMATS = ("csv", "json", "svg")


def _formats(text: str) -> tuple[str, ...]:
    fmts = tuple(f.strip().lower() for f in text.split(",") if f.strip())
    bad = [f for f in fmts if f not in FORMATS]
    if bad or not fmts:
        raise argparse.ArgumentTypeError(f"formats must be a subset of {','.join(FORMATS)}")
    return fmts


def _seed(text: str) -> int:
    n = int(text)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sheetlytics", description="Spreadsheet model analytics.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run every block of an analysis spec")
    r.add_argument("model", type=Path)
    r.add_argument("spec", type=Path)
    r.add_argument("--out", type=Path, required=True, help="output directory")
    r.add_argument("--format", type=_formats, default=FORMATS, help="comma list of csv,json,svg")
    r.add_argument("--seed", type=_seed, default=None, help="override every simulate block's seed")

    e = sub.add_parser("eval", help="print one cell's value")
    e.add_argument("model", type=Path)
    e.add_argument("--cell", required=True)

    c = sub.add_parser("check", help="parse the model and lint roles")
    c.add_argument("model", type=Path)
    return p


def cmd_run(args) -> int:
    wb = read_workbook(args.model)
    blocks = read_spec(args.spec)
    if not blocks:
        print(f"warning: {args.spec} contains no blocks; nothing to do", file=sys.stderr)
        return EXIT_OK
    failed = 0
    for block in blocks:
        res = run_block(wb, block, args.seed)
        write_result(res, args.out, args.format)
        mark = "ok" if res.ok else "FAILED"
        print(f"[{res.kind} {res.name}] {mark}: {res.headline}")
        failed += not res.ok
    return EXIT_BLOCK_FAILED if failed else EXIT_OK


def cmd_eval(args) -> int:
    wb = read_workbook(args.model)
    v = wb.evaluate(parse_address(args.cell).relative())
    print(repr(v) if isinstance(v, float) else display(v))
    return EXIT_OK


def lint(wb) -> list[str]:
    """Advisory findings that do not stop a model from loading."""
    notes = []
    if not wb.performance_measures:
        notes.append("no performance measure assigned")
    if not wb.inputs:
        notes.append("no input cells assigned a data or decision role")
    for addr in sorted(wb.cells, key=lambda a: a.sort_key):
        content = wb.content(addr)
        role = wb.role(addr)
        if role is None and isinstance(content, Formula) and not wb.precedents(addr):
            notes.append(f"{addr}: formula has no cell references (hard-coded value?)")
        if role is not None and role.kind is RoleKind.PERFORMANCE and not role.label:
            notes.append(f"{addr}: performance measure has no label")
    return notes


def cmd_check(args) -> int:
    wb = read_workbook(args.model)
    n_formulas = sum(isinstance(c, Formula) for c in wb.cells.values())
    print(
        f"{args.model}: {len(wb.cells)} cells, {n_formulas} formulas, "
        f"{len(wb.inputs)} inputs, {len(wb.performance_measures)} performance measure(s)"
    )
    for note in lint(wb):
        print(f"warning: {note}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "eval": cmd_eval, "check": cmd_check}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (SheetError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: {e.filename or ''}: {e.strerror}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
