"""The ten acceptance criteria, each at its stated tolerance.

Every criterion prints one PASS/FAIL line: in the pytest terminal summary,
or directly when this file is run as a script.
"""

import functools
import math
import random
import time

import pytest

from conftest import fingerprint, irr_workbook
from sheetlytics import (
    GoalSeekSpec,
    OptimizeSpec,
    SimulationSpec,
    SweepSpec,
    Threshold,
    TornadoInput,
    Uniform,
    Variable,
    Workbook,
    demo_workbook,
    goal_seek,
    load_workbook,
    multi_start_goal_seek,
    optimize,
    parse_address,
    run_simulation,
    scenario_summary,
    sweep_one,
    sweep_two,
    tornado,
    what_if,
)
from sheetlytics.simulate import Normal, Triangular
from sheetlytics.values import CellError, round_half_away

RESULTS: list[str] = []


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                fn(*args, **kwargs)
            except BaseException as e:
                RESULTS.append(f"FAIL  criterion {number:>2}: {title}  ({type(e).__name__}: {e})")
                raise
            RESULTS.append(f"PASS  criterion {number:>2}: {title}  [{time.perf_counter() - t0:.2f}s]")

        return run

    return wrap


def dp2(x):
    return round_half_away(x, 2)


@criterion(1, "seven-scenario Total Net Profit column, under 1 s")
def test_01_scenario_table():
    t0 = time.perf_counter()
    wb = demo_workbook()
    summary = scenario_summary(wb, wb.scenarios, ["G13"])
    elapsed = time.perf_counter() - t0
    expected = [38.33, 26.04, 50.33, 42.33, 32.33, 20.04, 54.33]
    got = [r.values[0] for r in summary.rows]
    assert [dp2(v) for v in got] == expected
    assert all(abs(g - e) <= 0.005 for g, e in zip(got, expected))
    assert elapsed < 1.0


@criterion(2, "what-if Belex revenue 50.72 / reps 200 -> 42.56, change 4.23")
def test_02_what_if():
    out = what_if(demo_workbook(), {"D10": 50.72, "D7": 200}).output("G13")
    assert dp2(out.value) == 42.56 and abs(out.value - 42.56) <= 0.005
    assert dp2(out.change_from_base) == 4.23 and abs(out.change_from_base - 4.23) <= 0.005


@criterion(3, "scenario 3 contributions, expenses and total")
def test_03_cell_level_scenario_3():
    wb = demo_workbook()
    row = wb.scenarios.row(3)
    what_if(wb, list(zip(wb.scenarios.columns, row.values)))
    contrib = [wb.evaluate(f"{c}11") for c in "CDEF"]
    expense = [wb.evaluate(f"{c}12") for c in "CDEF"]
    for got, want in zip(contrib + expense, [18.09, 32.30, 16.76, 7.18, 6.00, 6.00, 7.50, 4.50]):
        assert dp2(got) == want and abs(got - want) <= 0.005
    assert dp2(wb.evaluate("G13")) == 50.33


@criterion(4, "goal seek Total Net Profit = 30 by rep cost -> 80835.75")
def test_04_goal_seek_linear():
    wb = demo_workbook()
    r = goal_seek(wb, GoalSeekSpec("G13", 30.0, "C4"))
    assert r.converged
    assert abs(r.solution - 80835.75) <= 0.5
    wb.set_value("C4", r.solution)
    assert abs(wb.evaluate("G13") - 30.0) <= 0.001


@criterion(5, "multiple-IRR fixture: exactly roots 0.10 and 0.20")
def test_05_multiple_irr():
    results = multi_start_goal_seek(irr_workbook(), GoalSeekSpec("C1", 0.0, "A1", tolerance=1e-9), [0.05, 0.5])
    roots = [r.solution for r in results if r.converged]
    assert len(results) == 2 and len(roots) == 2
    assert abs(roots[0] - 0.10) <= 1e-6 and abs(roots[1] - 0.20) <= 1e-6


# -- criterion 6: independent oracle -----------------------------------------
#
# Random formulas are generated as small trees, rendered to text for the
# engine, and evaluated directly by the recursive memoized evaluator below,
# which shares no code with the engine.

OPS = {"+": float.__add__, "-": float.__sub__, "*": float.__mul__}


def gen_expr(rng, i, depth=0):
    roll = rng.random()
    if i == 1 or depth >= 3 or roll < 0.25:
        if i > 1 and rng.random() < 0.6:
            return ("ref", rng.randint(1, i - 1))
        return ("num", round(rng.uniform(-10, 10), rng.randint(0, 3)))
    if roll < 0.6:
        op = rng.choice("+-*/")
        return ("bin", op, gen_expr(rng, i, depth + 1), gen_expr(rng, i, depth + 1))
    if roll < 0.75:
        a = rng.randint(1, i - 1)
        return ("sumrange", a, rng.randint(a, i - 1))
    if roll < 0.85:
        return ("sum", [gen_expr(rng, i, depth + 1) for _ in range(rng.randint(1, 3))])
    return ("if", rng.choice([">", "<", "="]), *(gen_expr(rng, i, depth + 1) for _ in range(4)))


def render(e):
    kind = e[0]
    if kind == "num":
        return f"({e[1]!r})" if e[1] < 0 else repr(e[1])
    if kind == "ref":
        return f"A{e[1]}"
    if kind == "bin":
        return f"({render(e[2])}{e[1]}{render(e[3])})"
    if kind == "sumrange":
        return f"SUM(A{e[1]}:A{e[2]})"
    if kind == "sum":
        return "SUM(" + ",".join(render(a) for a in e[1]) + ")"
    _, cmp, l, r, t, f = e
    return f"IF({render(l)}{cmp}{render(r)},{render(t)},{render(f)})"


class Err(str):
    pass


def oracle_values(cells):
    """cells: {row: ("lit", x) | ("f", tree)} -> {row: float | Err}."""
    memo = {}

    def cell(j):
        if j not in memo:
            kind, body = cells[j]
            memo[j] = body if kind == "lit" else ev(body)
        return memo[j]

    def fin(x):
        return x if math.isfinite(x) else Err("NUM")

    def ev(e):
        kind = e[0]
        if kind == "num":
            return float(e[1])
        if kind == "ref":
            return cell(e[1])
        if kind == "bin":
            a, b = ev(e[2]), ev(e[3])
            if isinstance(a, Err):
                return a
            if isinstance(b, Err):
                return b
            if e[1] == "/":
                return Err("DIV0") if b == 0 else fin(a / b)
            return fin(OPS[e[1]](a, b))
        if kind in ("sumrange", "sum"):
            items = [cell(j) for j in range(e[1], e[2] + 1)] if kind == "sumrange" else [ev(a) for a in e[1]]
            for x in items:
                if isinstance(x, Err):
                    return x
            try:
                return fin(math.fsum(items))
            except OverflowError:
                return Err("NUM")
        _, cmp, l, r, t, f = e
        a, b = ev(l), ev(r)
        if isinstance(a, Err):
            return a
        if isinstance(b, Err):
            return b
        cond = a > b if cmp == ">" else a < b if cmp == "<" else a == b
        return ev(t) if cond else ev(f)

    return {j: cell(j) for j in cells}


def random_model(rng):
    n = rng.randint(2, 100)
    cells = {}
    for i in range(1, n + 1):
        if i == 1 or rng.random() < 0.3:
            cells[i] = ("lit", round(rng.uniform(-100, 100), 2))
        else:
            cells[i] = ("f", gen_expr(rng, i))
    return cells


def model_text(cells):
    lines = ["[cells]"]
    for j, (kind, body) in cells.items():
        lines.append(f"A{j}: {body!r}" if kind == "lit" else f"A{j}: ={render(body)}")
    return "\n".join(lines) + "\n"


def same(engine, expected):
    if isinstance(expected, Err):
        codes = {"DIV0": "#DIV/0!", "NUM": "#NUM!"}
        return isinstance(engine, CellError) and engine.code.value == codes[expected]
    if not isinstance(engine, float):
        return False
    return engine == expected or abs(engine - expected) <= 1e-12 * max(abs(engine), abs(expected))


@criterion(6, "incremental recalculation equals independent oracle, 200 workbooks < 10 s")
def test_06_engine_oracle():
    rng = random.Random(20241015)
    t0 = time.perf_counter()
    checked = 0
    for _ in range(200):
        cells = random_model(rng)
        wb = load_workbook(model_text(cells))
        wb.values()
        j = rng.randint(1, len(cells))
        if rng.random() < 0.5:
            cells[j] = ("lit", round(rng.uniform(-100, 100), 2))
        else:
            cells[j] = ("f", gen_expr(rng, j))
        kind, body = cells[j]
        wb.set_cell(f"A{j}", body if kind == "lit" else "=" + render(body))
        got = wb.recalculate()
        expected = oracle_values(cells)
        for row, want in expected.items():
            v = got[parse_address(f"A{row}")]
            assert same(v, want), f"A{row}: engine {v!r}, oracle {want!r}"
            checked += 1
    assert time.perf_counter() - t0 < 10.0
    assert checked > 200


# -- criterion 7 -------------------------------------------------------------

def perturbed_demo(rng):
    wb = demo_workbook()
    for a in rng.sample(wb.inputs, 3):
        wb.set_value(a, wb.content(a).value * rng.uniform(0.5, 1.5))
    wb.recalculate()
    return wb


def random_values(rng, base, k):
    return [base * rng.uniform(0.2, 2.0) for _ in range(k)]


def case_sweep_one(wb, rng):
    p = rng.choice(wb.inputs)
    sweep_one(wb, SweepSpec(p, random_values(rng, wb.content(p).value, rng.randint(1, 6)), ["G11", "G12", "G13"]))


def case_sweep_two(wb, rng):
    p, q = rng.sample(wb.inputs, 2)
    vals = lambda a: random_values(rng, wb.content(a).value, rng.randint(1, 4))
    sweep_two(wb, (p, vals(p)), (q, vals(q)), ["G13", "C13"])


def case_tornado(wb, rng):
    spec = []
    for a in rng.sample(wb.inputs, rng.randint(1, 5)):
        lo, hi = sorted(random_values(rng, wb.content(a).value, 2))
        spec.append(TornadoInput(a, lo, hi))
    tornado(wb, spec, "G13")


def case_scenarios(wb, rng):
    numbers = rng.sample(range(1, 8), rng.randint(1, 7))
    scenario_summary(wb, wb.scenarios, ["G13", "G11"], numbers)


def case_simulate(wb, rng):
    data = [a for a in wb.inputs if wb.role(a).kind.value == "data"]
    bindings = {}
    for a in rng.sample(data, rng.randint(1, 4)):
        x = wb.content(a).value
        bindings[a] = rng.choice([Uniform(0.8 * x, 1.2 * x), Triangular(0.8 * x, x, 1.3 * x), Normal(x, 0.1 * abs(x))])
    run_simulation(wb, SimulationSpec(bindings, rng.randint(1, 40), rng.getrandbits(64), ["G13"]))


CASES = [case_sweep_one, case_sweep_two, case_tornado, case_scenarios, case_simulate]


@criterion(7, "analyses leave the workbook bitwise unchanged (125 randomized cases)")
def test_07_state_restoration():
    rng = random.Random(7)
    for k in range(125):
        wb = perturbed_demo(rng)
        before = fingerprint(wb)
        CASES[k % len(CASES)](wb, rng)
        assert fingerprint(wb) == before, CASES[k % len(CASES)].__name__


@criterion(8, "tornado swings 11.01 > 10.00 and order invariant under permutation")
def test_08_tornado():
    wb = demo_workbook()
    spec = [TornadoInput("D6", 0.58, 0.88, "Belex margin"), TornadoInput("C4", 50000, 75000, "Rep cost")]
    data = tornado(wb, spec, "G13")
    swing = {str(r.address): r.swing for r in data.rows}
    assert dp2(swing["D6"]) == 11.01 and dp2(swing["C4"]) == 10.00
    assert swing["D6"] > swing["C4"]
    extra = spec + [TornadoInput("D10", 30, 45), TornadoInput("F6", 0.4, 0.6), TornadoInput("E7", 100, 150)]
    reference = tornado(wb, extra, "G13").rows
    rng = random.Random(8)
    for _ in range(20):
        perm = extra[:]
        rng.shuffle(perm)
        assert tornado(wb, perm, "G13").rows == reference


def passthrough():
    return load_workbook('[cells]\nA1: 0.5\nB1: =A1\n[roles]\ndata A1 "X"\noutput B1 "Y"\n')


@criterion(9, "seeded simulation repeats bitwise; Uniform(0,1) mean and tail at n=10,000")
def test_09_simulation():
    spec = SimulationSpec({"A1": Uniform(0, 1)}, 10_000, 42, ["B1"], [Threshold("B1", ">=", 0.9)], keep_trials=True)
    a, b = run_simulation(passthrough(), spec), run_simulation(passthrough(), spec)
    assert a.trials_csv() == b.trials_csv()
    sa, sb = a.stats[0], b.stats[0]
    for x, y in [(sa.mean, sb.mean), (sa.stdev, sb.stdev), (sa.thresholds[0][1], sb.thresholds[0][1])]:
        assert float.hex(x) == float.hex(y)
    assert sa.percentiles == sb.percentiles
    assert 0.49 <= sa.mean <= 0.51
    assert 0.085 <= sa.thresholds[0][1] <= 0.115


@criterion(10, "maximize -(x-3)^2 on [0,10] -> 3.0; best_value is a fresh evaluation")
def test_10_optimization():
    wb = Workbook()
    wb.set_cell("A1", 0.0)
    wb.set_cell("B1", "=-(A1-3)^2")
    wb.assign_role("A1", "decision")
    r = optimize(wb, OptimizeSpec([Variable("A1", 0, 10)], "B1"))
    assert abs(r.best_point[0] - 3.0) <= 1e-5
    wb.set_value("A1", r.best_point[0])
    assert r.best_value == wb.evaluate("B1")


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_"):
            try:
                fn()
            except Exception:
                failed += 1
    print("\n".join(RESULTS))
    sys.exit(1 if failed else 0)
