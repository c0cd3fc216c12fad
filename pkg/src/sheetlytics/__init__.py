"""Spreadsheet-model analytics: formula engine, what-if and sensitivity
analysis, scenarios, goal seek, bounded optimization and Monte Carlo."""

from .address import CellAddress, CellRange, parse_address, parse_range
from .analysis import (
    SA1Table,
    SA2Grid,
    ScenarioRow,
    ScenarioTable,
    SweepSpec,
    TornadoData,
    TornadoInput,
    apply_scenario,
    scenario_summary,
    sweep_one,
    sweep_two,
    tornado,
    what_if,
)
from .backsolve import GoalSeekResult, GoalSeekSpec, Status, goal_seek, multi_start_goal_seek
from .charts import render_histogram_svg, render_sweep_svg, render_tornado_svg
from .errors import (
    AddressError,
    AnalysisError,
    FormulaSyntaxError,
    ProtectionError,
    RoleError,
    SheetError,
    SpecFormatError,
    UnknownAddressError,
    WorkbookFormatError,
)
from .fileformat import demo_workbook, dump_workbook, load_workbook, parse_spec, read_spec, read_workbook
from .formula import parse_formula, print_formula
from .optimize import OptimizeResult, OptimizeSpec, Variable, optimize
from .simulate import (
    Discrete,
    Normal,
    SimulationReport,
    SimulationSpec,
    Threshold,
    Triangular,
    Uniform,
    run_simulation,
)
from .values import CellError, ErrorCode
from .workbook import Formula, NumberLiteral, Role, RoleKind, Snapshot, TextLiteral, Workbook

__version__ = "0.1.0"
