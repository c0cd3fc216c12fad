"""Seeded Monte Carlo simulation over data inputs.

Random numbers come from SplitMix64. Trial ``t`` draws from its own stream,
seeded with one SplitMix64 step of ``seed ^ t``, so any trial can be
reproduced on its own and results do not depend on execution order.
"""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass, field
from typing import Sequence, Union

from .address import CellAddress
from .analysis import preserved
from .errors import AnalysisError
from .values import is_number
from .workbook import RoleKind, Workbook, as_address

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
PERCENTILES = (1, 5, 10, 25, 50, 75, 90, 95, 99)
HISTOGRAM_BINS = 20
MAX_FAILURE_FRACTION = 0.10


def splitmix64_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (new_state, output)."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state, out = splitmix64_next(self.state)
        return out

    def next_double(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def trial_stream(seed: int, trial: int) -> SplitMix64:
    _, sub_seed = splitmix64_next((seed ^ trial) & MASK64)
    return SplitMix64(sub_seed)


# -- distributions -----------------------------------------------------------

@dataclass(frozen=True)
class Uniform:
    a: float
    b: float
    draws = 1

    def __post_init__(self):
        if not self.a < self.b:
            raise AnalysisError(f"Uniform needs a < b, got ({self.a}, {self.b})")

    def sample(self, u: float, u2: float | None = None) -> float:
        return self.a + (self.b - self.a) * u


@dataclass(frozen=True)
class Triangular:
    a: float
    mode: float
    b: float
    draws = 1

    def __post_init__(self):
        if not (self.a < self.b and self.a <= self.mode <= self.b):
            raise AnalysisError(f"Triangular needs a <= mode <= b and a < b, got {self}")

    def sample(self, u: float, u2: float | None = None) -> float:
        a, m, b = self.a, self.mode, self.b
        split = (m - a) / (b - a)
        if u < split:
            return a + math.sqrt(u * (b - a) * (m - a))
        return b - math.sqrt((1.0 - u) * (b - a) * (b - m))


@dataclass(frozen=True)
class Normal:
    mean: float
    sd: float
    draws = 2

    def __post_init__(self):
        if not self.sd > 0:
            raise AnalysisError(f"Normal needs sd > 0, got {self.sd}")

    def sample(self, u: float, u2: float | None = None) -> float:
        if u2 is None:
            raise AnalysisError("Normal sampling needs two uniforms")
        # 1 - u lies in (0, 1], keeping the log finite
        z = math.sqrt(-2.0 * math.log(1.0 - u)) * math.cos(2.0 * math.pi * u2)
        return self.mean + self.sd * z


@dataclass(frozen=True)
class Discrete:
    values: tuple
    probs: tuple
    draws = 1

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if not self.values or len(self.values) != len(self.probs):
            raise AnalysisError("Discrete needs matching, non-empty values and probabilities")
        if any(p < 0 for p in self.probs) or abs(math.fsum(self.probs) - 1.0) > 1e-9:
            raise AnalysisError("Discrete probabilities must be >= 0 and sum to 1")

    def sample(self, u: float, u2: float | None = None) -> float:
        # buckets are [cum_{k-1}, cum_k): u landing on a boundary goes right
        cum = 0.0
        for v, p in zip(self.values, self.probs):
            cum += p
            if u < cum:
                return v
        return self.values[-1]


Distribution = Union[Uniform, Triangular, Normal, Discrete]

DISTRIBUTIONS = {
    "uniform": Uniform,
    "triangular": Triangular,
    "normal": Normal,
    "discrete": Discrete,
}


def sample(dist, u: float, u2: float | None = None) -> float:
    if not 0.0 <= u < 1.0:
        raise AnalysisError(f"u must lie in [0, 1), got {u}")
    return dist.sample(u, u2)


def percentile(sorted_samples: Sequence[float], p: float) -> float:
    """Inclusive linear-interpolation percentile on pre-sorted data."""
    n = len(sorted_samples)
    if n == 0:
        raise AnalysisError("percentile of an empty sample")
    if not 0.0 <= p <= 100.0:
        raise AnalysisError(f"percentile must be in [0, 100], got {p}")
    rank = (p / 100.0) * (n - 1)
    lo = math.floor(rank)
    hi = min(lo + 1, n - 1)
    frac = rank - lo
    if frac == 0.0:
        return sorted_samples[lo]
    return sorted_samples[lo] + frac * (sorted_samples[hi] - sorted_samples[lo])


# -- simulation --------------------------------------------------------------

@dataclass(frozen=True)
class Threshold:
    output: CellAddress
    direction: str  # ">=" or "<="
    level: float

    def __post_init__(self):
        object.__setattr__(self, "output", as_address(self.output))
        if self.direction not in (">=", "<="):
            raise AnalysisError(f"threshold direction must be >= or <=, not {self.direction!r}")

    def hit(self, x: float) -> bool:
        return x >= self.level if self.direction == ">=" else x <= self.level


@dataclass
class SimulationSpec:
    bindings: dict
    trials: int
    seed: int
    outputs: list[CellAddress]
    thresholds: list[Threshold] = field(default_factory=list)
    keep_trials: bool = False

    def __post_init__(self):
        self.bindings = {as_address(a): d for a, d in self.bindings.items()}
        self.outputs = [as_address(o) for o in self.outputs]
        if self.trials < 1:
            raise AnalysisError("trials must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise AnalysisError("seed must be an unsigned 64-bit integer")
        if not self.outputs:
            raise AnalysisError("simulation needs at least one output")


@dataclass
class Histogram:
    lower: float
    upper: float
    counts: list[int]

    @property
    def edges(self) -> list[float]:
        width = (self.upper - self.lower) / len(self.counts)
        return [self.lower + i * width for i in range(len(self.counts))] + [self.upper]


@dataclass
class OutputStats:
    address: CellAddress
    label: str
    n: int
    mean: float | None
    median: float | None
    stdev: float | None
    percentiles: dict[int, float]
    min: float | None
    max: float | None
    thresholds: list[tuple[Threshold, float]]
    histogram: Histogram | None


@dataclass
class SimulationReport:
    trials: int
    seed: int
    failures: int
    status: str
    stats: list[OutputStats]
    inputs: list[CellAddress]
    trial_rows: list[tuple] | None = None

    def output(self, addr) -> OutputStats:
        addr = as_address(addr)
        for s in self.stats:
            if s.address == addr:
                return s
        raise KeyError(str(addr))

    def trials_csv(self) -> str:
        """One row per trial: index, sampled inputs, outputs."""
        if self.trial_rows is None:
            raise AnalysisError("trial matrix was not kept; rerun with keep_trials")
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial"] + [str(a) for a in self.inputs] + [str(s.address) for s in self.stats])
        for row in self.trial_rows:
            w.writerow([row[0]] + [_csv_value(v) for v in row[1:]])
        return buf.getvalue()


def _csv_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _histogram(xs: list[float]) -> Histogram:
    lo, hi = xs[0], xs[-1]
    counts = [0] * HISTOGRAM_BINS
    if hi == lo:
        counts[0] = len(xs)
        return Histogram(lo, hi, counts)
    width = (hi - lo) / HISTOGRAM_BINS
    for x in xs:
        k = min(int((x - lo) / width), HISTOGRAM_BINS - 1)
        counts[k] += 1
    return Histogram(lo, hi, counts)


def summarize(addr: CellAddress, label: str, xs: list[float], thresholds: list[Threshold]) -> OutputStats:
    n = len(xs)
    if n == 0:
        return OutputStats(addr, label, 0, None, None, None, {}, None, None,
                           [(t, None) for t in thresholds], None)
    s = sorted(xs)
    return OutputStats(
        address=addr,
        label=label,
        n=n,
        mean=math.fsum(s) / n,
        median=percentile(s, 50),
        stdev=statistics.stdev(s) if n > 1 else 0.0,
        percentiles={p: percentile(s, p) for p in PERCENTILES},
        min=s[0],
        max=s[-1],
        thresholds=[(t, sum(1 for x in xs if t.hit(x)) / n) for t in thresholds],
        histogram=_histogram(s),
    )


def run_simulation(wb: Workbook, spec: SimulationSpec) -> SimulationReport:
    """Run ``spec.trials`` seeded trials; the workbook is restored afterwards.

    A trial fails when any output is not a number. Statistics use the
    successful trials only; above 10% failures the report status is
    ``"error"``.
    """
    for a in spec.bindings:
        r = wb.role(a)
        if r is None or r.kind is not RoleKind.DATA:
            raise AnalysisError(f"{a} must be a data input to carry a distribution")
    missing = [o for o in spec.outputs if o not in wb.cells]
    if missing:
        raise AnalysisError(f"unknown output {', '.join(map(str, missing))}")
    for t in spec.thresholds:
        if t.output not in spec.outputs:
            raise AnalysisError(f"threshold output {t.output} is not a simulation output")

    bound = list(spec.bindings.items())
    columns: list[list[float]] = [[] for _ in spec.outputs]
    rows = [] if spec.keep_trials else None
    failures = 0
    with preserved(wb, [a for a, _ in bound]):
        for t in range(spec.trials):
            rng = trial_stream(spec.seed, t)
            drawn = []
            for a, dist in bound:
                u = rng.next_double()
                u2 = rng.next_double() if dist.draws == 2 else None
                x = dist.sample(u, u2)
                wb.set_value(a, x)
                drawn.append(x)
            wb.recalculate()
            outs = [wb.evaluate(o) for o in spec.outputs]
            if all(is_number(v) for v in outs):
                for col, v in zip(columns, outs):
                    col.append(v)
            else:
                failures += 1
            if rows is not None:
                rows.append((t, *drawn, *outs))

    stats = [
        summarize(o, wb.label(o), col, [th for th in spec.thresholds if th.output == o])
        for o, col in zip(spec.outputs, columns)
    ]
    status = "error" if failures > MAX_FAILURE_FRACTION * spec.trials else "ok"
    return SimulationReport(spec.trials, spec.seed, failures, status, stats, [a for a, _ in bound], rows)
