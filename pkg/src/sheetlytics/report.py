"""Run analysis-spec blocks against a workbook and emit CSV / JSON / SVG.

Every block produces one table. The CSV is that table; the JSON carries
the same ``columns`` and ``rows`` at full precision plus block metadata.
"""

from __future__ import annotations

import csv
import io
import json
import shlex
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import analysis as an
from .address import parse_address
from .backsolve import GoalSeekSpec, goal_seek, multi_start_goal_seek
from .charts import label_number, render_histogram_svg, render_sweep_svg, render_tornado_svg
from .errors import SheetError, SpecFormatError
from .fileformat import SpecBlock, parse_number
from .optimize import OptimizeSpec, Variable, optimize
from .simulate import DISTRIBUTIONS, SimulationSpec, Threshold, run_simulation
from .values import CellError, display, to_json
from .workbook import Workbook

SCHEMA = "sheetlytics.report"
SCHEMA_VERSION = 1
DISPLAY_DECIMALS = 2


@dataclass
class BlockResult:
    kind: str
    name: str
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    svg: str | None = None
    extra: dict[str, str] = field(default_factory=dict)
    status: str = "ok"
    error: str | None = None
    headline: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_json(self) -> str:
        head = {
            "schema": SCHEMA,
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "name": self.name,
            "status": self.status,
        }
        if self.error is not None:
            head["error"] = self.error
        head["display_decimals"] = DISPLAY_DECIMALS
        head["columns"] = self.columns
        # one table row per line keeps reports readable and diffable
        parts = [f"  {_dump(k)}: {_dump(v)}" for k, v in head.items()]
        rows = ",\n".join("    " + _dump([to_json(v) for v in row]) for row in self.rows)
        parts.append('  "rows": [' + (f"\n{rows}\n  " if rows else "") + "]")
        parts.append('  "meta": ' + _dump(self.meta, indent=2).replace("\n", "\n  "))
        return "{\n" + ",\n".join(parts) + "\n}\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_csv_cell(v) for v in row])
        return buf.getvalue()


def _dump(x, indent=None) -> str:
    return json.dumps(x, indent=indent, ensure_ascii=False, allow_nan=False)


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, CellError):
        return str(v)
    return str(v)


def _fmt(v) -> str:
    return display(v, DISPLAY_DECIMALS) if isinstance(v, float) else display(v)


# -- value parsing -----------------------------------------------------------

def _words(block: SpecBlock, text: str) -> list[str]:
    try:
        return shlex.split(text)
    except ValueError as e:
        raise SpecFormatError(f"[{block.kind} {block.name}] {e}", block.line) from None


def _addr(text: str):
    return parse_address(text).relative()


def _addrs(block, text):
    return [_addr(w) for w in _words(block, text)]


def _nums(block, text) -> list[float]:
    return [parse_number(w) for w in _words(block, text)]


def _flag(text, default=False) -> bool:
    if text is None:
        return default
    t = text.strip().lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise SpecFormatError(f"expected true/false, got {text!r}")


def _values(block: SpecBlock, prefix: str = "") -> list[float]:
    vals = block.get(prefix + "values")
    lin = block.get(prefix + "linspace")
    if (vals is None) == (lin is None):
        raise SpecFormatError(
            f"[{block.kind} {block.name}] give exactly one of {prefix}values / {prefix}linspace", block.line
        )
    if vals is not None:
        return _nums(block, vals)
    parts = _words(block, lin)
    if len(parts) != 3:
        raise SpecFormatError(f"[{block.kind} {block.name}] linspace = START STOP COUNT", block.line)
    return an.linspace(parse_number(parts[0]), parse_number(parts[1]), int(parts[2]))


def _outputs(wb, block):
    text = block.get("outputs")
    return None if text is None else _addrs(block, text)


# -- block runners -----------------------------------------------------------

def _output_rows(outs):
    return [["output", str(o.address), o.label, o.value, o.benchmark, o.change_from_base] for o in outs]


def run_whatif(wb: Workbook, block: SpecBlock, res: BlockResult) -> None:
    pairs = []
    for text, _ in block.get_all("set"):
        w = _words(block, text)
        if len(w) != 2:
            raise SpecFormatError(f"[whatif {block.name}] set = ADDR VALUE", block.line)
        pairs.append((_addr(w[0]), parse_number(w[1])))
    if not pairs:
        raise SpecFormatError(f"[whatif {block.name}] needs at least one set line", block.line)
    report = an.what_if(wb, pairs, _outputs(wb, block))
    res.columns = ["kind", "address", "label", "value", "benchmark", "change_from_base"]
    res.rows = [["input", str(a), wb.label(a), v, None, None] for a, v in report.assignments]
    res.rows += _output_rows(report.outputs)
    first = report.outputs[0]
    res.headline = f"{first.label} = {_fmt(first.value)}"
    if first.change_from_base is not None:
        res.headline += f" (change from base {_fmt(first.change_from_base)})"


def run_sweep1(wb, block, res) -> None:
    param = _addr(block.require("parameter"))
    outs = _outputs(wb, block) or an.default_outputs(wb)
    table = an.sweep_one(wb, an.SweepSpec(param, _values(block), outs))
    res.columns = [str(param)] + [str(o) for o in table.outputs]
    res.rows = [[r.parameter_value] + list(r.values) for r in table.rows]
    res.meta = {
        "parameter": {"address": str(param), "label": table.parameter_label},
        "outputs": [{"address": str(a), "label": l} for a, l in zip(table.outputs, table.output_labels)],
    }
    res.svg = render_sweep_svg(table)
    res.headline = f"{len(table.rows)} rows over {table.parameter_label}"


def run_sweep2(wb, block, res) -> None:
    rp, cp = _addr(block.require("row_parameter")), _addr(block.require("col_parameter"))
    grid = an.sweep_two(wb, (rp, _values(block, "row_")), (cp, _values(block, "col_")), _outputs(wb, block))
    res.columns = ["output", str(rp), str(cp), "value"]
    for o in grid.outputs:
        m = grid.matrix(o)
        for i, rv in enumerate(grid.row_values):
            for j, cv in enumerate(grid.col_values):
                res.rows.append([str(o), rv, cv, m[i][j]])
    res.meta = {
        "row_parameter": {"address": str(rp), "label": wb.label(rp), "values": grid.row_values},
        "col_parameter": {"address": str(cp), "label": wb.label(cp), "values": grid.col_values},
        "tables": [
            {"output": str(o), "label": l, "matrix": [[to_json(v) for v in row] for row in grid.matrix(o)]}
            for o, l in zip(grid.outputs, grid.output_labels)
        ],
    }
    res.headline = f"{len(grid.row_values)}x{len(grid.col_values)} grid, {len(grid.outputs)} table(s)"


def run_tornado(wb, block, res) -> None:
    output = _addr(block.require("output"))
    spec = []
    for text, n in block.get_all("input"):
        w = _words(block, text)
        if len(w) not in (3, 4):
            raise SpecFormatError(f"[tornado {block.name}] input = ADDR LOW HIGH [\"label\"]", n)
        spec.append(an.TornadoInput(_addr(w[0]), parse_number(w[1]), parse_number(w[2]), w[3] if len(w) == 4 else None))
    if not spec:
        raise SpecFormatError(f"[tornado {block.name}] needs at least one input line", block.line)
    data = an.tornado(wb, spec, output)
    res.columns = ["rank", "address", "label", "low", "high", "out_low", "out_high", "swing"]
    res.rows = [
        [i + 1, str(r.address), r.label, r.low, r.high, r.out_low, r.out_high, r.swing]
        for i, r in enumerate(data.rows)
    ]
    res.meta = {
        "output": {"address": str(output), "label": data.output_label},
        "base_output": data.base_output,
        "warnings": data.warnings,
    }
    res.svg = render_tornado_svg(data)
    top = data.rows[0]
    res.headline = f"widest: {top.label} swing {_fmt(top.swing)} around base {_fmt(data.base_output)}"


def run_scenario(wb, block, res) -> None:
    table = wb.scenarios
    if table is None:
        raise SheetError("workbook has no [scenarios] section")
    numbers = block.get("numbers")
    numbers = None if numbers is None else [int(x) for x in _words(block, numbers)]
    summary = an.scenario_summary(wb, table, _outputs(wb, block), numbers)
    res.columns = ["number", "name"] + [str(c) for c in table.columns] + [str(o) for o in summary.outputs]
    for r in summary.rows:
        values = table.row(int(r.parameter_value)).values
        res.rows.append([int(r.parameter_value), r.name] + list(values) + list(r.values))
    res.meta = {
        "inputs": [{"address": str(c), "label": wb.label(c)} for c in table.columns],
        "outputs": [{"address": str(a), "label": l} for a, l in zip(summary.outputs, summary.output_labels)],
    }
    last = summary.rows[-1]
    res.headline = f"{len(summary.rows)} scenarios; last {last.name!r} {summary.output_labels[0]} = {_fmt(last.values[0])}"


def run_goalseek(wb, block, res) -> None:
    def opt(key, conv, default):
        v = block.get(key)
        return default if v is None else conv(v)

    spec = GoalSeekSpec(
        set_cell=_addr(block.require("set_cell")),
        target=parse_number(block.require("target")),
        by_changing=_addr(block.require("by_changing")),
        tolerance=opt("tolerance", parse_number, 0.001),
        max_iterations=opt("max_iterations", int, 100),
        initial=opt("initial", parse_number, None),
        bracket_expansion=opt("expansion", parse_number, 2.0),
    )
    starts = block.get("starts")
    if starts is not None:
        results = multi_start_goal_seek(wb, spec, _nums(block, starts))
    else:
        results = [goal_seek(wb, spec)]
    res.columns = ["start", "status", "solution", "achieved", "residual", "iterations"]
    res.rows = [[r.start, r.status.value, r.solution, r.achieved, r.residual, r.iterations] for r in results]
    res.meta = {
        "set_cell": str(spec.set_cell),
        "target": spec.target,
        "by_changing": str(spec.by_changing),
        "tolerance": spec.tolerance,
        "max_iterations": spec.max_iterations,
        "notes": [r.note for r in results],
    }
    found = [r for r in results if r.converged]
    if found:
        res.headline = f"{spec.by_changing} = " + ", ".join(label_number(r.solution) for r in found)
    else:
        res.status = "error"
        res.error = results[0].note or results[0].status.value
        res.headline = results[0].status.value


def run_optimize(wb, block, res) -> None:
    variables = []
    for text, n in block.get_all("variable"):
        w = _words(block, text)
        if len(w) != 3:
            raise SpecFormatError(f"[optimize {block.name}] variable = ADDR LOWER UPPER", n)
        variables.append(Variable(_addr(w[0]), parse_number(w[1]), parse_number(w[2])))
    tol = block.get("refine_tolerance")
    spec = OptimizeSpec(
        variables,
        _addr(block.require("objective")),
        (block.get("direction") or "maximize").lower(),
        int(block.get("grid_points") or 21),
        None if tol is None else parse_number(tol),
    )
    result = optimize(wb, spec)
    res.columns = ["kind", "address", "label", "value"]
    res.rows = [["variable", str(v.address), wb.label(v.address), x] for v, x in zip(spec.variables, result.best_point)]
    res.rows.append(["objective", str(spec.objective), wb.label(spec.objective), result.best_value])
    res.meta = {
        "direction": spec.direction,
        "bounds": [{"address": str(v.address), "lower": v.lower, "upper": v.upper} for v in spec.variables],
        "grid_points": spec.grid_points,
        "evaluations": result.evaluations,
        "grid_best_point": result.grid_best_point,
        "grid_best_value": result.grid_best_value,
        "multimodal": result.multimodal,
        "failed_points": result.failed_points,
        "warnings": result.warnings,
    }
    res.headline = f"best {wb.label(spec.objective)} = {_fmt(result.best_value)} at " + ", ".join(
        f"{v.address}={x:.6g}" for v, x in zip(spec.variables, result.best_point)
    )


def _distribution(block, words: list[str], n: int):
    name = words[0].lower()
    cls = DISTRIBUTIONS.get(name)
    if cls is None:
        raise SpecFormatError(f"unknown distribution {words[0]!r}", n)
    args = words[1:]
    if name == "discrete":
        pairs = [a.split(":") for a in args]
        if not pairs or any(len(p) != 2 for p in pairs):
            raise SpecFormatError("discrete takes VALUE:PROB pairs", n)
        return cls([parse_number(v) for v, _ in pairs], [parse_number(p) for _, p in pairs])
    return cls(*[parse_number(a) for a in args])


def run_simulate(wb, block, res, seed_override: int | None = None) -> None:
    bindings = {}
    for text, n in block.get_all("bind"):
        w = _words(block, text)
        if len(w) < 2:
            raise SpecFormatError(f"[simulate {block.name}] bind = ADDR DIST PARAMS...", n)
        try:
            bindings[_addr(w[0])] = _distribution(block, w[1:], n)
        except TypeError:
            raise SpecFormatError(f"wrong number of parameters for {w[1]}", n) from None
    thresholds = []
    for text, n in block.get_all("threshold"):
        w = _words(block, text)
        if len(w) != 3:
            raise SpecFormatError(f"[simulate {block.name}] threshold = ADDR >=|<= LEVEL", n)
        thresholds.append(Threshold(_addr(w[0]), w[1], parse_number(w[2])))
    seed = seed_override if seed_override is not None else int(block.get("seed") or 0)
    keep = _flag(block.get("raw"))
    spec = SimulationSpec(
        bindings,
        int(block.require("trials")),
        seed,
        _outputs(wb, block) or an.default_outputs(wb),
        thresholds,
        keep_trials=keep,
    )
    report = run_simulation(wb, spec)
    res.columns = ["output", "statistic", "value"]
    hist = []
    for s in report.stats:
        a = str(s.address)
        res.rows += [[a, "n", s.n], [a, "mean", s.mean], [a, "median", s.median], [a, "stdev", s.stdev]]
        res.rows += [[a, f"p{p}", v] for p, v in s.percentiles.items()]
        res.rows += [[a, "min", s.min], [a, "max", s.max]]
        res.rows += [[a, f"P({t.direction}{label_number(t.level)})", prob] for t, prob in s.thresholds]
        if s.histogram is not None:
            hist.append({"output": a, "label": s.label, "lower": s.histogram.lower,
                         "upper": s.histogram.upper, "counts": s.histogram.counts})
    res.rows.append(["*", "failures", report.failures])
    res.meta = {
        "trials": report.trials,
        "seed": report.seed,
        "failures": report.failures,
        "bindings": [{"address": str(a), "distribution": type(d).__name__.lower(), **asdict(d)}
                     for a, d in spec.bindings.items()],
        "histograms": hist,
    }
    if hist:
        h = hist[0]
        res.svg = render_histogram_svg(h["label"], h["lower"], h["upper"], h["counts"])
    if keep:
        res.extra["trials.csv"] = report.trials_csv()
    if report.status != "ok":
        res.status = "error"
        res.error = f"{report.failures} of {report.trials} trials failed"
    first = report.stats[0]
    res.headline = f"{first.label}: mean {_fmt(first.mean)}, sd {_fmt(first.stdev)} over {first.n} trials"


RUNNERS = {
    "whatif": run_whatif,
    "sweep1": run_sweep1,
    "sweep2": run_sweep2,
    "tornado": run_tornado,
    "scenario": run_scenario,
    "goalseek": run_goalseek,
    "optimize": run_optimize,
    "simulate": run_simulate,
}


KEYS = {
    "whatif": {"set", "outputs"},
    "sweep1": {"parameter", "values", "linspace", "outputs"},
    "sweep2": {"row_parameter", "row_values", "row_linspace", "col_parameter", "col_values",
               "col_linspace", "outputs"},
    "tornado": {"output", "input"},
    "scenario": {"outputs", "numbers"},
    "goalseek": {"set_cell", "target", "by_changing", "tolerance", "max_iterations", "initial",
                 "expansion", "starts"},
    "optimize": {"variable", "objective", "direction", "grid_points", "refine_tolerance"},
    "simulate": {"bind", "trials", "seed", "outputs", "threshold", "raw"},
}


def run_block(wb: Workbook, block: SpecBlock, seed_override: int | None = None) -> BlockResult:
    """Run one block on a private copy of ``wb``; failures are captured in
    the result, never raised."""
    wb = wb.copy()
    res = BlockResult(block.kind, block.name)
    try:
        unknown = sorted({k for k, _, _ in block.entries} - KEYS[block.kind])
        if unknown:
            raise SpecFormatError(f"[{block.kind} {block.name}] unknown key(s): {', '.join(unknown)}", block.line)
        if block.kind == "simulate":
            run_simulate(wb, block, res, seed_override)
        else:
            RUNNERS[block.kind](wb, block, res)
    except (SheetError, ValueError) as e:
        res.status = "error"
        res.error = str(e)
        res.columns, res.rows, res.svg, res.extra = [], [], None, {}
        res.headline = res.error
    return res


def write_result(res: BlockResult, out_dir: Path, formats=("csv", "json", "svg")) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    def put(name: str, text: str):
        p = out_dir / name
        p.write_text(text, encoding="utf-8", newline="\n")
        written.append(p)

    if res.ok and "csv" in formats:
        put(f"{res.name}.csv", res.to_csv())
    if "json" in formats or not res.ok:
        put(f"{res.name}.json", res.to_json())
    if res.ok and res.svg is not None and "svg" in formats:
        put(f"{res.name}.svg", res.svg)
    if "csv" in formats:
        for suffix, text in sorted(res.extra.items()):
            put(f"{res.name}.{suffix}", text)
    return written
