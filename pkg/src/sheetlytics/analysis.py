"""What-if, one- and two-parameter sweeps, tornado data, scenario tool.

Every technique here is an organized series of what-ifs: assign input
values, recalculate, read outputs. Sweeps, tornado and scenario summaries
restore the workbook afterwards (Data-Table semantics); ``what_if`` and
``apply_scenario`` leave their assignments in place unless asked not to.
"""

from __future__ import annotations

import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .address import CellAddress
from .errors import AnalysisError, UnknownAddressError
from .values import CellValue, is_number
from .workbook import AddressLike, NumberLiteral, RoleKind, Workbook, as_address

log = logging.getLogger(__name__)


@dataclass
class OutputValue:
    address: CellAddress
    label: str
    value: CellValue
    benchmark: float | None = None
    change_from_base: float | None = None


@dataclass
class WhatIfReport:
    assignments: list[tuple[CellAddress, float]]
    outputs: list[OutputValue]

    def output(self, addr: AddressLike) -> OutputValue:
        addr = as_address(addr)
        for o in self.outputs:
            if o.address == addr:
                return o
        raise KeyError(str(addr))


@dataclass
class SweepSpec:
    parameter: CellAddress
    values: list[float]
    outputs: list[CellAddress]

    def __post_init__(self):
        self.parameter = as_address(self.parameter)
        self.values = [float(v) for v in self.values]
        self.outputs = [as_address(o) for o in self.outputs]
        if not self.values:
            raise AnalysisError("sweep needs at least one parameter value")


@dataclass
class SA1Row:
    parameter_value: float
    values: list[CellValue]
    name: str | None = None


@dataclass
class SA1Table:
    parameter: CellAddress | None
    parameter_label: str
    outputs: list[CellAddress]
    output_labels: list[str]
    rows: list[SA1Row]

    def column(self, output: AddressLike) -> list[CellValue]:
        i = self.outputs.index(as_address(output))
        return [r.values[i] for r in self.rows]


@dataclass
class SA2Grid:
    row_parameter: CellAddress
    row_values: list[float]
    col_parameter: CellAddress
    col_values: list[float]
    outputs: list[CellAddress]
    output_labels: list[str]
    matrices: dict[CellAddress, list[list[CellValue]]]

    def matrix(self, output: AddressLike) -> list[list[CellValue]]:
        return self.matrices[as_address(output)]


@dataclass
class TornadoInput:
    address: CellAddress
    low: float
    high: float
    label: str | None = None

    def __post_init__(self):
        self.address = as_address(self.address)
        self.low = float(self.low)
        self.high = float(self.high)


@dataclass
class TornadoRow:
    address: CellAddress
    label: str
    low: float
    high: float
    out_low: float
    out_high: float

    @property
    def swing(self) -> float:
        return abs(self.out_high - self.out_low)


@dataclass
class TornadoData:
    output: CellAddress
    output_label: str
    base_output: float
    rows: list[TornadoRow]
    warnings: list[str] = field(default_factory=list)


@dataclass
class ScenarioRow:
    number: int
    name: str
    values: list[float]


@dataclass
class ScenarioTable:
    columns: list[CellAddress]
    rows: list[ScenarioRow]

    def __post_init__(self):
        self.columns = [as_address(c) for c in self.columns]
        if len(set(self.columns)) != len(self.columns):
            raise AnalysisError("scenario columns must be distinct cells")
        for r in self.rows:
            if len(r.values) != len(self.columns):
                raise AnalysisError(
                    f"scenario {r.number} has {len(r.values)} values for {len(self.columns)} columns"
                )
        numbers = sorted(r.number for r in self.rows)
        if numbers != list(range(1, len(self.rows) + 1)):
            raise AnalysisError("scenario numbers must be 1..S without gaps or repeats")

    def __len__(self) -> int:
        return len(self.rows)

    def row(self, number: int) -> ScenarioRow:
        for r in self.rows:
            if r.number == number:
                return r
        raise AnalysisError(f"scenario number {number} out of range 1..{len(self.rows)} (#REF!)")


@dataclass
class ScenarioResult:
    number: int
    name: str
    assignments: list[tuple[CellAddress, float]]
    outputs: list[OutputValue]


# -- helpers -----------------------------------------------------------------

def _require_cells(wb: Workbook, addrs: Iterable[CellAddress]) -> None:
    missing = sorted({a for a in addrs if a not in wb.cells})
    if missing:
        raise UnknownAddressError(missing)


def _require_inputs(wb: Workbook, addrs: Iterable[CellAddress]) -> None:
    addrs = list(addrs)
    _require_cells(wb, addrs)
    for a in addrs:
        if not wb.is_input(a):
            raise AnalysisError(f"{a} is not an input (needs a data or decision role)")


def default_outputs(wb: Workbook) -> list[CellAddress]:
    return wb.performance_measures or wb.addresses_with(RoleKind.OUTPUT)


def _outputs(wb: Workbook, outputs) -> list[CellAddress]:
    outs = default_outputs(wb) if outputs is None else [as_address(o) for o in outputs]
    _require_cells(wb, outs)
    return outs


def read_outputs(wb: Workbook, outputs: Sequence[CellAddress]) -> list[OutputValue]:
    result = []
    for a in outputs:
        v = wb.evaluate(a)
        bench = wb.benchmarks.get(a)
        cfb = v - bench if bench is not None and is_number(v) else None
        result.append(OutputValue(a, wb.label(a), v, bench, cfb))
    return result


@contextmanager
def preserved(wb: Workbook, addrs: Iterable[CellAddress]):
    """Put the given literal cells back the way they were on exit."""
    saved = {a: wb.cells[a] for a in addrs}
    try:
        yield
    finally:
        for a, content in saved.items():
            wb.set_value(a, content.value)
        wb.recalculate()


def _assign(wb: Workbook, pairs: Iterable[tuple[CellAddress, float]]) -> None:
    for a, v in pairs:
        wb.set_value(a, v)
    wb.recalculate()


def _as_pairs(assignments) -> list[tuple[CellAddress, float]]:
    items = assignments.items() if isinstance(assignments, Mapping) else assignments
    return [(as_address(a), float(v)) for a, v in items]


# -- techniques --------------------------------------------------------------

def what_if(wb: Workbook, assignments, outputs=None, restore: bool = False) -> WhatIfReport:
    """Apply ``assignments`` ({address: value}), recalculate and report the
    outputs with their change from base. The workbook keeps the new
    values unless ``restore`` is set."""
    pairs = _as_pairs(assignments)
    _require_inputs(wb, [a for a, _ in pairs])
    outs = _outputs(wb, outputs)
    if restore:
        with preserved(wb, {a for a, _ in pairs}):
            _assign(wb, pairs)
            report = read_outputs(wb, outs)
    else:
        _assign(wb, pairs)
        report = read_outputs(wb, outs)
    return WhatIfReport(pairs, report)


def sweep_one(wb: Workbook, spec: SweepSpec) -> SA1Table:
    _require_inputs(wb, [spec.parameter])
    _require_cells(wb, spec.outputs)
    rows = []
    with preserved(wb, [spec.parameter]):
        for v in spec.values:
            _assign(wb, [(spec.parameter, v)])
            rows.append(SA1Row(v, [wb.evaluate(o) for o in spec.outputs]))
    return SA1Table(
        spec.parameter,
        wb.label(spec.parameter),
        list(spec.outputs),
        [wb.label(o) for o in spec.outputs],
        rows,
    )


def sweep_two(
    wb: Workbook,
    row_spec: tuple[AddressLike, Sequence[float]],
    col_spec: tuple[AddressLike, Sequence[float]],
    outputs=None,
) -> SA2Grid:
    row_param, row_values = as_address(row_spec[0]), [float(v) for v in row_spec[1]]
    col_param, col_values = as_address(col_spec[0]), [float(v) for v in col_spec[1]]
    if row_param == col_param:
        raise AnalysisError(f"{row_param} cannot be both row and column parameter")
    if not row_values or not col_values:
        raise AnalysisError("two-parameter sweep needs values on both axes")
    _require_inputs(wb, [row_param, col_param])
    outs = _outputs(wb, outputs)
    matrices = {o: [[None] * len(col_values) for _ in row_values] for o in outs}
    with preserved(wb, [row_param, col_param]):
        for i, rv in enumerate(row_values):
            for j, cv in enumerate(col_values):
                _assign(wb, [(row_param, rv), (col_param, cv)])
                for o in outs:
                    matrices[o][i][j] = wb.evaluate(o)
    return SA2Grid(
        row_param, row_values, col_param, col_values, outs, [wb.label(o) for o in outs], matrices
    )


def tornado(wb: Workbook, spec: Sequence[TornadoInput], output: AddressLike) -> TornadoData:
    """Evaluate ``output`` with each input at its low and high value, all
    other inputs held at their current values."""
    output = as_address(output)
    _require_cells(wb, [output])
    addrs = [s.address for s in spec]
    if len(set(addrs)) != len(addrs):
        raise AnalysisError("tornado inputs must be distinct cells")
    _require_inputs(wb, addrs)
    for s in spec:
        if s.low > s.high:
            raise AnalysisError(f"tornado row {s.label or s.address}: low {s.low!r} > high {s.high!r}")
    warnings = []
    if not wb.at_base_case():
        msg = "workbook inputs differ from the base case; tornado is centred on current values"
        log.warning(msg)
        warnings.append(msg)
    base = wb.evaluate(output)
    if not is_number(base):
        raise AnalysisError(f"{output} evaluates to {base} at current inputs")
    rows = []
    for s in spec:
        outs = []
        with preserved(wb, [s.address]):
            for v in (s.low, s.high):
                _assign(wb, [(s.address, v)])
                y = wb.evaluate(output)
                if not is_number(y):
                    raise AnalysisError(f"{output} evaluates to {y} with {s.address}={v!r}")
                outs.append(y)
        rows.append(TornadoRow(s.address, s.label or wb.label(s.address), s.low, s.high, outs[0], outs[1]))
    rows.sort(key=lambda r: (-r.swing, r.label))
    return TornadoData(output, wb.label(output), base, rows, warnings)


def apply_scenario(wb: Workbook, table: ScenarioTable, k: int, outputs=None) -> ScenarioResult:
    """Echo scenario ``k``'s values into its input cells and recalculate.
    Inputs not covered by the table keep their current values."""
    _require_inputs(wb, table.columns)
    row = table.row(k)
    pairs = list(zip(table.columns, row.values))
    outs = _outputs(wb, outputs)
    _assign(wb, pairs)
    return ScenarioResult(row.number, row.name, pairs, read_outputs(wb, outs))


def scenario_summary(wb: Workbook, table: ScenarioTable, outputs=None, numbers=None) -> SA1Table:
    """One row per scenario, in table order, recomputed from the live model."""
    _require_inputs(wb, table.columns)
    outs = _outputs(wb, outputs)
    chosen = table.rows if numbers is None else [table.row(n) for n in numbers]
    rows = []
    with preserved(wb, table.columns):
        for r in chosen:
            _assign(wb, zip(table.columns, r.values))
            rows.append(SA1Row(float(r.number), [wb.evaluate(o) for o in outs], r.name))
    return SA1Table(None, "Scenario Number", outs, [wb.label(o) for o in outs], rows)


def linspace(start: float, stop: float, n: int) -> list[float]:
    if n < 1:
        raise AnalysisError("need at least one point")
    if n == 1:
        return [float(start)]
    step = (stop - start) / (n - 1)
    return [start + i * step if i < n - 1 else float(stop) for i in range(n)]


def current_value(wb: Workbook, addr: AddressLike) -> float:
    c = wb.content(addr)
    if not isinstance(c, NumberLiteral):
        raise AnalysisError(f"{as_address(addr)} does not hold a number")
    return c.value
