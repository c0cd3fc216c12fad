"""Best values for one or two boxed decision variables.

Exhaustive grid first, then golden-section refinement around the best grid
point. No constraints beyond the box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

from .address import CellAddress
from .analysis import linspace, preserved
from .errors import AnalysisError
from .values import is_number
from .workbook import Workbook, as_address

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
MAX_PASSES = 50


class OptimizationError(AnalysisError):
    pass


@dataclass
class Variable:
    address: CellAddress
    lower: float
    upper: float

    def __post_init__(self):
        self.address = as_address(self.address)
        self.lower, self.upper = float(self.lower), float(self.upper)
        if not self.lower < self.upper:
            raise AnalysisError(f"{self.address}: lower bound must be < upper bound")

    @property
    def span(self) -> float:
        return self.upper - self.lower


@dataclass
class OptimizeSpec:
    variables: list[Variable]
    objective: CellAddress
    direction: str = "maximize"
    grid_points: int = 21
    refine_tolerance: float | None = None

    def __post_init__(self):
        self.variables = [v if isinstance(v, Variable) else Variable(*v) for v in self.variables]
        self.objective = as_address(self.objective)
        if not 1 <= len(self.variables) <= 2:
            raise AnalysisError("optimization supports one or two decision variables")
        if len({v.address for v in self.variables}) != len(self.variables):
            raise AnalysisError("decision variables must be distinct cells")
        if self.direction not in ("maximize", "minimize"):
            raise AnalysisError(f"direction must be maximize or minimize, not {self.direction!r}")
        if self.grid_points < 3:
            raise AnalysisError("grid_points must be >= 3")

    def tolerance_for(self, v: Variable) -> float:
        return self.refine_tolerance if self.refine_tolerance is not None else 1e-6 * v.span


@dataclass
class OptimizeResult:
    best_point: list[float]
    best_value: float
    evaluations: int
    multimodal: bool = False
    grid_best_point: list[float] = field(default_factory=list)
    grid_best_value: float | None = None
    failed_points: int = 0
    warnings: list[str] = field(default_factory=list)


class _Objective:
    def __init__(self, wb: Workbook, spec: OptimizeSpec):
        self.wb = wb
        self.spec = spec
        self.sign = 1.0 if spec.direction == "maximize" else -1.0
        self.evaluations = 0

    def __call__(self, point) -> float:
        """Signed score (larger is better); -inf where the objective errors."""
        self.evaluations += 1
        for var, x in zip(self.spec.variables, point):
            self.wb.set_value(var.address, x)
        v = self.wb.evaluate(self.spec.objective)
        return self.sign * v if is_number(v) else -math.inf


def golden_section_max(f, lo: float, hi: float, tol: float, max_iter: int = 200):
    """Maximize a unimodal ``f`` on [lo, hi]; returns (x, f(x)) for the best
    interior point probed."""
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _count_local_maxima(scores: dict, shape: tuple[int, ...]) -> int:
    """Distinct grid local maxima (plateaus counted once)."""
    def neighbours(idx):
        for axis in range(len(shape)):
            for step in (-1, 1):
                j = list(idx)
                j[axis] += step
                if 0 <= j[axis] < shape[axis]:
                    yield tuple(j)

    finite = {k: s for k, s in scores.items() if s > -math.inf}
    peaks = {k for k, s in finite.items() if all(s >= scores[n] for n in neighbours(k))}
    # merge adjacent equal-valued peaks
    groups = 0
    seen = set()
    for k in sorted(peaks):
        if k in seen:
            continue
        groups += 1
        stack = [k]
        seen.add(k)
        while stack:
            cur = stack.pop()
            for n in neighbours(cur):
                if n in peaks and n not in seen and scores[n] == scores[cur]:
                    seen.add(n)
                    stack.append(n)
    return groups


def optimize(wb: Workbook, spec: OptimizeSpec, apply: bool = False) -> OptimizeResult:
    """Grid search plus golden-section refinement.

    The workbook is restored afterwards; with ``apply`` the best point is
    left in the decision cells.
    """
    missing = [v.address for v in spec.variables if not wb.is_input(v.address)]
    if missing:
        raise AnalysisError(f"{', '.join(map(str, missing))}: decision variables must be input cells")
    if spec.objective not in wb.cells:
        raise AnalysisError(f"objective {spec.objective} is empty")
    warnings = []
    for v in spec.variables:
        if not wb.depends_on(spec.objective, v.address):
            warnings.append(f"{spec.objective} does not depend on {v.address}")

    f = _Objective(wb, spec)
    with preserved(wb, [v.address for v in spec.variables]):
        axes = [linspace(v.lower, v.upper, spec.grid_points) for v in spec.variables]
        shape = tuple(len(a) for a in axes)
        scores = {}
        for idx in itertools.product(*(range(n) for n in shape)):
            scores[idx] = f([axes[k][i] for k, i in enumerate(idx)])
        failed = sum(1 for s in scores.values() if s == -math.inf)
        if failed * 2 > len(scores):
            raise OptimizationError(
                f"objective {spec.objective} is an error at {failed} of {len(scores)} grid points"
            )
        best_idx = max(scores, key=lambda k: (scores[k], [-i for i in k]))
        grid_point = [axes[k][i] for k, i in enumerate(best_idx)]
        grid_score = scores[best_idx]

        point, score = list(grid_point), grid_score
        if len(spec.variables) == 1:
            point, score = _refine_axis(f, spec, point, score, 0, axes[0], best_idx[0])
        else:
            for _ in range(MAX_PASSES):
                start = score
                for axis in (0, 1):
                    i = _nearest_index(axes[axis], point[axis])
                    point, score = _refine_axis(f, spec, point, score, axis, axes[axis], i)
                if score - start < min(spec.tolerance_for(v) for v in spec.variables):
                    break

        f(point)
        best_value = wb.evaluate(spec.objective)
        multimodal = _count_local_maxima(scores, shape) > 1
        if multimodal:
            warnings.append("grid shows more than one local optimum; refined result is local")

    if apply:
        for v, x in zip(spec.variables, point):
            wb.set_value(v.address, x)
        wb.recalculate()

    return OptimizeResult(
        best_point=point,
        best_value=best_value,
        evaluations=f.evaluations,
        multimodal=multimodal,
        grid_best_point=grid_point,
        grid_best_value=f.sign * grid_score,
        failed_points=failed,
        warnings=warnings,
    )


def _nearest_index(axis: list[float], x: float) -> int:
    return min(range(len(axis)), key=lambda i: abs(axis[i] - x))


def _refine_axis(f, spec, point, score, axis, grid, i):
    """Golden section on one axis over the grid cells either side of index
    ``i``; keeps the incumbent unless the refinement strictly improves it."""
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    centre = point[axis]
    lo, hi = min(lo, centre), max(hi, centre)

    def along(x):
        p = list(point)
        p[axis] = x
        return f(p)

    x, s = golden_section_max(along, lo, hi, spec.tolerance_for(spec.variables[axis]))
    if s > score:
        p = list(point)
        p[axis] = x
        return p, s
    return point, score
