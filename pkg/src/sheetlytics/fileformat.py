"""Text formats: the ``.sheet`` workbook file and the ``.spec`` analysis file.

Workbook file::

    [cells]
    C4: 60000
    B4: "Sales Rep Cost"
    C11: =C10*C6
    [roles]
    data C4 "Sales Rep Cost"
    performance G13 "Total Net Profit"
    [scenarios]
    columns C4 C6
    1 "Base Case" 60000 0.62

Analysis spec file: ``[kind name]`` headers followed by ``key = value`` lines.
Keys may repeat where a block takes several entries (``input`` in a
tornado, ``variable`` in an optimization, ``bind`` in a simulation).
"""

from __future__ import annotations

import re
import shlex
from dataclasses import dataclass, field
from importlib import resources

from .address import parse_address
from .analysis import ScenarioRow, ScenarioTable
from .errors import AddressError, AnalysisError, FormulaSyntaxError, RoleError, WorkbookFormatError, SpecFormatError
from .formula import format_number
from .workbook import Formula, NumberLiteral, RoleKind, TextLiteral, Workbook

_NUMBER_RE = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_SECTION_RE = re.compile(r"^\[\s*([A-Za-z0-9_]+)(?:\s+([^\]]+?))?\s*\]$")
SPEC_KINDS = ("whatif", "sweep1", "sweep2", "tornado", "scenario", "goalseek", "optimize", "simulate")


def strip_comment(line: str) -> str:
    in_quote = False
    for i, ch in enumerate(line):
        if ch == '"':
            in_quote = not in_quote
        elif ch == "#" and not in_quote:
            return line[:i]
    return line


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw).strip()
        if line:
            yield n, line


def parse_number(text: str, line: int | None = None) -> float:
    if not _NUMBER_RE.match(text):
        raise WorkbookFormatError(f"not a number: {text!r}", line)
    return float(text)


def _split(text: str, line: int) -> list[str]:
    try:
        return shlex.split(text)
    except ValueError as e:
        raise WorkbookFormatError(f"{e}: {text!r}", line) from None


def _addr(text: str, line: int):
    try:
        return parse_address(text).relative()
    except AddressError as e:
        raise WorkbookFormatError(str(e), line) from None


# -- workbook ----------------------------------------------------------------

def load_workbook(text: str) -> Workbook:
    """Parse, build the graph, reject cycles, record base case and benchmarks."""
    wb = Workbook()
    section = None
    columns = None
    scen_rows: list[ScenarioRow] = []
    scen_line = None
    role_lines = []
    for n, line in _lines(text):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).lower()
            if section not in ("cells", "roles", "scenarios") or m.group(2):
                raise WorkbookFormatError(f"unknown section {line}", n)
            continue
        if section is None:
            raise WorkbookFormatError("content before the first section header", n)
        if section == "cells":
            _cell_line(wb, line, n)
        elif section == "roles":
            parts = _split(line, n)
            if len(parts) not in (2, 3):
                raise WorkbookFormatError("role line must be: KIND ADDR [\"label\"]", n)
            try:
                kind = RoleKind(parts[0].lower())
            except ValueError:
                raise WorkbookFormatError(f"unknown role {parts[0]!r}", n) from None
            role_lines.append((_addr(parts[1], n), kind, parts[2] if len(parts) == 3 else "", n))
        else:
            parts = _split(line, n)
            scen_line = scen_line or n
            if parts[0].lower() == "columns":
                if columns is not None:
                    raise WorkbookFormatError("duplicate columns line", n)
                columns = [_addr(p, n) for p in parts[1:]]
                continue
            if columns is None:
                raise WorkbookFormatError("scenario rows need a preceding columns line", n)
            if len(parts) < 2 or not parts[0].isdigit():
                raise WorkbookFormatError("scenario row must be: NUMBER \"name\" values...", n)
            scen_rows.append(ScenarioRow(int(parts[0]), parts[1], [parse_number(p, n) for p in parts[2:]]))

    for addr, kind, label, n in role_lines:
        try:
            wb.assign_role(addr, kind, label)
        except RoleError as e:
            raise WorkbookFormatError(str(e), n) from None

    if columns is not None:
        try:
            wb.scenarios = ScenarioTable(columns, scen_rows)
        except AnalysisError as e:
            raise WorkbookFormatError(str(e), scen_line) from None
        bad = [str(c) for c in columns if not wb.is_input(c)]
        if bad:
            raise WorkbookFormatError(f"scenario columns must be input cells: {', '.join(bad)}", scen_line)

    wb.calculate_all()
    members = wb.cycle_members()
    if members:
        raise WorkbookFormatError("circular reference through " + ", ".join(str(a) for a in members))
    wb.mark_base_case()
    return wb


def _cell_line(wb: Workbook, line: str, n: int) -> None:
    addr_text, sep, rest = line.partition(":")
    if not sep:
        raise WorkbookFormatError("cell line must be ADDR: value", n)
    addr = _addr(addr_text.strip(), n)
    if addr in wb.cells:
        raise WorkbookFormatError(f"duplicate address {addr}", n)
    value = rest.strip()
    if value.startswith("="):
        try:
            content = Formula.parse(value)
        except FormulaSyntaxError as e:
            raise WorkbookFormatError(f"{addr}: {e}", n) from None
    elif value.startswith('"'):
        if len(value) < 2 or not value.endswith('"'):
            raise WorkbookFormatError("unterminated text literal", n)
        content = TextLiteral(value[1:-1].replace('""', '"'))
    else:
        content = NumberLiteral(parse_number(value, n))
    wb.set_cell(addr, content)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dump_workbook(wb: Workbook) -> str:
    out = ["[cells]"]
    for a in sorted(wb.cells):
        c = wb.cells[a]
        if isinstance(c, NumberLiteral):
            text = format_number(c.value)
        elif isinstance(c, TextLiteral):
            text = '"' + c.value.replace('"', '""') + '"'
        else:
            text = c.source
        out.append(f"{a}: {text}")
    if wb.roles:
        out.append("")
        out.append("[roles]")
        for a in sorted(wb.roles):
            r = wb.roles[a]
            out.append(f"{r.kind.value} {a} {_quote(r.label)}" if r.label else f"{r.kind.value} {a}")
    if wb.scenarios is not None:
        out.append("")
        out.append("[scenarios]")
        out.append("columns " + " ".join(str(c) for c in wb.scenarios.columns))
        for r in wb.scenarios.rows:
            out.append(" ".join([str(r.number), _quote(r.name)] + [format_number(v) for v in r.values]))
    return "\n".join(out) + "\n"


def read_workbook(path) -> Workbook:
    with open(path, encoding="utf-8") as f:
        return load_workbook(f.read())


def demo_workbook_text() -> str:
    return resources.files("sheetlytics").joinpath("data/salesforce.sheet").read_text(encoding="utf-8")


def demo_workbook() -> Workbook:
    """The four-product sales-force model with its seven-scenario table."""
    return load_workbook(demo_workbook_text())


# -- analysis spec -----------------------------------------------------------

@dataclass
class SpecBlock:
    kind: str
    name: str
    line: int
    entries: list[tuple[str, str, int]] = field(default_factory=list)

    def get_all(self, key: str) -> list[tuple[str, int]]:
        return [(v, n) for k, v, n in self.entries if k == key]

    def get(self, key: str, default=None):
        found = self.get_all(key)
        if not found:
            return default
        if len(found) > 1:
            raise SpecFormatError(f"[{self.kind} {self.name}] key {key!r} given twice", found[1][1])
        return found[0][0]

    def require(self, key: str) -> str:
        v = self.get(key)
        if v is None:
            raise SpecFormatError(f"[{self.kind} {self.name}] missing required key {key!r}", self.line)
        return v


def parse_spec(text: str) -> list[SpecBlock]:
    blocks: list[SpecBlock] = []
    names = set()
    for n, line in _lines(text):
        m = _SECTION_RE.match(line)
        if m:
            kind, name = m.group(1).lower(), (m.group(2) or "").strip()
            if kind not in SPEC_KINDS:
                raise SpecFormatError(f"unknown block kind {kind!r}", n)
            if not name or not re.match(r"^[A-Za-z0-9_.-]+$", name):
                raise SpecFormatError(f"block needs a file-safe name: [{kind} NAME]", n)
            if name in names:
                raise SpecFormatError(f"duplicate block name {name!r}", n)
            names.add(name)
            blocks.append(SpecBlock(kind, name, n))
            continue
        if not blocks:
            raise SpecFormatError("content before the first block header", n)
        key, sep, value = line.partition("=")
        if not sep:
            raise SpecFormatError("expected key = value", n)
        blocks[-1].entries.append((key.strip().lower(), value.strip(), n))
    return blocks


def read_spec(path) -> list[SpecBlock]:
    with open(path, encoding="utf-8") as f:
        return parse_spec(f.read())
