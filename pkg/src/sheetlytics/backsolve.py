"""Goal seek: find an input value that drives a formula cell to a target.

The search runs in three phases:

1. secant probing from the starting value, which follows the local slope
   the way a spreadsheet's Goal Seek does and therefore finds the root
   nearest the start (the property multi-start probing relies on);
2. if that stalls, geometric bracketing outward from the start;
3. Brent-style root finding (bisection with secant / inverse quadratic
   steps) inside the first bracket found.

Termination is on the residual ``|f(x) - target| <= tolerance``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .address import CellAddress
from .errors import AnalysisError
from .values import is_number
from .workbook import Formula, Workbook, as_address

MAX_BRACKET_PROBES = 60
SECANT_STEPS = 30


class Status(enum.Enum):
    CONVERGED = "Converged"
    MAX_ITERATIONS = "MaxIterationsReached"
    NO_BRACKET = "NoBracketFound"
    FUNCTION_ERROR = "FunctionError"


@dataclass
class GoalSeekSpec:
    set_cell: CellAddress
    target: float
    by_changing: CellAddress
    tolerance: float = 0.001
    max_iterations: int = 100
    initial: float | None = None
    bracket_expansion: float = 2.0
    starts: list[float] | None = None

    def __post_init__(self):
        self.set_cell = as_address(self.set_cell)
        self.by_changing = as_address(self.by_changing)
        self.target = float(self.target)
        if not self.tolerance > 0:
            raise AnalysisError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise AnalysisError("max_iterations must be >= 1")
        if not self.bracket_expansion > 1:
            raise AnalysisError("bracket_expansion must be > 1")


@dataclass
class GoalSeekResult:
    status: Status
    solution: float | None
    achieved: float | None
    iterations: int
    residual: float | None
    start: float
    original: float
    note: str = ""
    error_at: float | None = None
    evaluations: int = 0

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED


class _FunctionError(Exception):
    def __init__(self, x: float, value):
        self.x = x
        self.value = value


@dataclass
class _Objective:
    wb: Workbook
    spec: GoalSeekSpec
    evaluations: int = 0
    best: tuple[float, float] | None = field(default=None)

    def __call__(self, x: float) -> float:
        self.evaluations += 1
        self.wb.set_value(self.spec.by_changing, x)
        v = self.wb.evaluate(self.spec.set_cell)
        if not is_number(v):
            raise _FunctionError(x, v)
        g = v - self.spec.target
        if self.best is None or abs(g) < abs(self.best[1]):
            self.best = (x, g)
        return g


class _Done(Exception):
    def __init__(self, x: float, iterations: int):
        self.x = x
        self.iterations = iterations


def _check(spec: GoalSeekSpec, x: float, g: float, iterations: int) -> None:
    if abs(g) <= spec.tolerance:
        raise _Done(x, iterations)


def _secant_phase(f: _Objective, spec: GoalSeekSpec, x0: float, g0: float, budget: int):
    """Secant iterations from the start. Returns (bracket or None, iterations).
    A bracket is reported as soon as two probes straddle the target."""
    h = spec.tolerance * max(1.0, abs(x0))
    x1 = x0 + h
    try:
        g1 = f(x1)
    except _FunctionError:
        return None, 0
    _check(spec, x1, g1, 0)
    if (g0 < 0) != (g1 < 0):
        return (x0, g0, x1, g1), 0
    it = 0
    while it < min(SECANT_STEPS, budget):
        if g1 == g0:
            return None, it
        x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
        if not math.isfinite(x2):
            return None, it
        it += 1
        try:
            g2 = f(x2)
        except _FunctionError:
            return None, it
        _check(spec, x2, g2, it)
        if (g2 < 0) != (g1 < 0):
            return (x1, g1, x2, g2), it
        if (g2 < 0) != (g0 < 0):
            return (x0, g0, x2, g2), it
        x0, g0, x1, g1 = x1, g1, x2, g2
    return None, it


def _geometric_bracket(f: _Objective, spec: GoalSeekSpec, x0: float, g0: float):
    base = spec.tolerance * max(1.0, abs(x0))
    last = {+1: (x0, g0), -1: (x0, g0)}
    for k in range(MAX_BRACKET_PROBES):
        step = base * spec.bracket_expansion ** k
        for sign in (+1, -1):
            x = x0 + sign * step
            g = f(x)
            _check(spec, x, g, 0)
            px, pg = last[sign]
            if (g < 0) != (pg < 0):
                return (px, pg, x, g)
            last[sign] = (x, g)
    return None


def _brent(f: _Objective, spec: GoalSeekSpec, bracket, budget: int) -> tuple[float, int, bool]:
    """Root-find on a sign-changing bracket. Returns (x, iterations, converged)."""
    a, fa, b, fb = bracket
    if abs(fa) < abs(fb):
        a, fa, b, fb = b, fb, a, fa
    c, fc = a, fa
    d = e = b - a
    for it in range(1, budget + 1):
        if abs(fb) <= spec.tolerance:
            return b, it - 1, True
        if (fb < 0) == (fc < 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, fa, b, fb, c, fc = b, fb, c, fc, b, fb
        eps = 2.0 * 2.0 ** -52 * abs(b)
        m = 0.5 * (c - b)
        if abs(m) <= eps:
            return b, it - 1, abs(fb) <= spec.tolerance
        if abs(e) >= eps and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p, q = 2.0 * m * s, 1.0 - s
            else:
                q0, r = fa / fc, fb / fc
                p = s * (2.0 * m * q0 * (q0 - r) - (b - a) * (r - 1.0))
                q = (q0 - 1.0) * (r - 1.0) * (s - 1.0)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2.0 * p < min(3.0 * m * q - abs(eps * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        b = b + d if abs(d) > eps else b + math.copysign(eps, m)
        fb = f(b)
    return b, budget, abs(fb) <= spec.tolerance


def goal_seek(wb: Workbook, spec: GoalSeekSpec, restore: bool = False) -> GoalSeekResult:
    """Backsolve ``spec.set_cell == spec.target`` by varying ``spec.by_changing``.

    On convergence the input is left at the solution unless ``restore`` is
    set; on any failure the original value is put back.
    """
    if not isinstance(wb.content(spec.set_cell), Formula):
        raise AnalysisError(f"set cell {spec.set_cell} must contain a formula")
    if not wb.is_input(spec.by_changing):
        raise AnalysisError(f"changing cell {spec.by_changing} must be an input")
    original = wb.content(spec.by_changing).value
    x0 = original if spec.initial is None else float(spec.initial)

    def fail(status, note, iterations=0, error_at=None, f=None):
        wb.set_value(spec.by_changing, original)
        wb.recalculate()
        achieved = residual = None
        if f is not None and f.best is not None:
            achieved = f.best[1] + spec.target
            residual = abs(f.best[1])
        return GoalSeekResult(
            status, None, achieved, iterations, residual, x0, original, note, error_at,
            f.evaluations if f else 0,
        )

    if not wb.depends_on(spec.set_cell, spec.by_changing):
        return fail(Status.NO_BRACKET, f"{spec.set_cell} does not depend on {spec.by_changing}")

    f = _Objective(wb, spec)
    iterations = 0
    try:
        try:
            g0 = f(x0)
            _check(spec, x0, g0, 0)
            bracket, iterations = _secant_phase(f, spec, x0, g0, spec.max_iterations)
            if bracket is None:
                bracket = _geometric_bracket(f, spec, x0, g0)
        except _FunctionError as e:
            return fail(Status.FUNCTION_ERROR, f"{spec.set_cell} is {e.value} at {e.x!r}", iterations, e.x, f)
        if bracket is None:
            return fail(Status.NO_BRACKET, "may not have found a solution: no sign change found", iterations, f=f)
        budget = spec.max_iterations - iterations
        if budget < 1:
            return fail(Status.MAX_ITERATIONS, "iteration cap reached", iterations, f=f)
        try:
            x, used, ok = _brent(f, spec, bracket, budget)
        except _FunctionError as e:
            return fail(Status.FUNCTION_ERROR, f"{spec.set_cell} is {e.value} at {e.x!r}", iterations, e.x, f)
        iterations += used
        if not ok:
            return fail(Status.MAX_ITERATIONS, "may not have found a solution: iteration cap reached", iterations, f=f)
    except _Done as done:
        x = done.x
        iterations = max(iterations, done.iterations)

    # leave the input at the solution and re-check independently
    wb.set_value(spec.by_changing, x)
    achieved = wb.evaluate(spec.set_cell)
    residual = abs(achieved - spec.target)
    result = GoalSeekResult(
        Status.CONVERGED if residual <= spec.tolerance else Status.MAX_ITERATIONS,
        x, achieved, iterations, residual, x0, original, evaluations=f.evaluations,
    )
    if restore:
        wb.set_value(spec.by_changing, original)
        wb.recalculate()
    return result


def multi_start_goal_seek(wb: Workbook, spec: GoalSeekSpec, starts=None) -> list[GoalSeekResult]:
    """Run goal seek from each start, restoring the workbook between runs.

    Converged solutions within ``10 * tolerance`` of each other are merged;
    converged results come first sorted by solution, then failures in start
    order. The workbook is left unchanged.
    """
    starts = list(starts if starts is not None else (spec.starts or []))
    if not starts:
        raise AnalysisError("multi-start goal seek needs at least one start")
    found: list[GoalSeekResult] = []
    failed: list[GoalSeekResult] = []
    for s0 in starts:
        run = GoalSeekSpec(
            spec.set_cell, spec.target, spec.by_changing, spec.tolerance,
            spec.max_iterations, float(s0), spec.bracket_expansion,
        )
        r = goal_seek(wb, run, restore=True)
        if not r.converged:
            failed.append(r)
        elif all(abs(r.solution - other.solution) > 10 * spec.tolerance for other in found):
            found.append(r)
    found.sort(key=lambda r: r.solution)
    return found + failed
