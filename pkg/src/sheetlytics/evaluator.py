"""Expression evaluation against a cell lookup.

Conventions: empty cells are 0 in arithmetic and skipped by aggregate
functions over ranges; booleans are 1/0 in arithmetic; text in arithmetic is
``#VALUE!``; the first error operand (left to right) wins; non-finite results
become ``#NUM!``.
"""

from __future__ import annotations

import math
from typing import Callable

from .address import CellAddress
from .formula import Binary, Bool, Call, Expr, Num, Range, Ref, Str, Unary
from .values import (
    DIV0,
    NAME,
    NUM,
    REF,
    VALUE,
    CellError,
    CellValue,
    finite_or_num,
    round_half_away,
)

Lookup = Callable[[CellAddress], CellValue]


class _RangeValue:
    """A range appearing as a function argument: rows of looked-up values."""

    __slots__ = ("rows",)

    def __init__(self, rows: list[list[CellValue]]):
        self.rows = rows

    def flat(self) -> list[CellValue]:
        return [v for row in self.rows for v in row]


def to_number(v: CellValue) -> float | CellError:
    if v is None:
        return 0.0
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, float):
        return v
    if isinstance(v, CellError):
        return v
    return VALUE


def to_bool(v: CellValue) -> bool | CellError:
    if isinstance(v, CellError):
        return v
    if isinstance(v, str):
        up = v.upper()
        if up in ("TRUE", "FALSE"):
            return up == "TRUE"
        return VALUE
    n = to_number(v)
    return n if isinstance(n, CellError) else n != 0.0


def npv(rate: float, flows) -> float | CellError:
    """Net present value with the first flow discounted one full period."""
    if rate <= -1.0:
        return NUM
    total = 0.0
    factor = 1.0
    for f in flows:
        factor *= 1.0 + rate
        total += f / factor
    return finite_or_num(total)


def evaluate_expr(expr: Expr, lookup: Lookup) -> CellValue:
    """Evaluate ``expr``. A top-level empty result (``=A1`` with A1 blank)
    is reported as 0."""
    v = _eval(expr, lookup)
    if isinstance(v, _RangeValue):
        return VALUE
    if v is None:
        return 0.0
    return v


def _eval(e: Expr, lookup: Lookup):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Str):
        return e.value
    if isinstance(e, Bool):
        return e.value
    if isinstance(e, Ref):
        return lookup(e.address.relative())
    if isinstance(e, Range):
        r = e.range
        return _RangeValue(
            [[lookup(r.at(i, j)) for j in range(r.n_cols)] for i in range(r.n_rows)]
        )
    if isinstance(e, Unary):
        v = _scalar(_eval(e.operand, lookup))
        if isinstance(v, CellError):
            return v
        n = to_number(v)
        if isinstance(n, CellError):
            return n
        return -n if e.op == "-" else n
    if isinstance(e, Binary):
        return _binary(e.op, _scalar(_eval(e.left, lookup)), _scalar(_eval(e.right, lookup)))
    if isinstance(e, Call):
        fn = _FUNCTIONS.get(e.name)
        if fn is None:
            return NAME
        return fn(e.args, lookup)
    raise TypeError(f"not an expression: {e!r}")


def _scalar(v):
    return VALUE if isinstance(v, _RangeValue) else v


def _binary(op: str, a: CellValue, b: CellValue) -> CellValue:
    if isinstance(a, CellError):
        return a
    if isinstance(b, CellError):
        return b
    if op in ("+", "-", "*", "/", "^"):
        x, y = to_number(a), to_number(b)
        if isinstance(x, CellError):
            return x
        if isinstance(y, CellError):
            return y
        return _arith(op, x, y)
    return _compare(op, a, b)


def _arith(op: str, x: float, y: float) -> CellValue:
    if op == "+":
        return finite_or_num(x + y)
    if op == "-":
        return finite_or_num(x - y)
    if op == "*":
        return finite_or_num(x * y)
    if op == "/":
        if y == 0.0:
            return DIV0
        return finite_or_num(x / y)
    # power
    if x == 0.0:
        if y == 0.0:
            return NUM
        if y < 0.0:
            return DIV0
        return 0.0
    if x < 0.0 and not y.is_integer():
        return NUM
    try:
        return finite_or_num(math.pow(x, y))
    except (OverflowError, ValueError):
        return NUM


# type rank used when comparing values of different kinds
def _rank(v) -> int:
    if isinstance(v, bool):
        return 2
    if isinstance(v, str):
        return 1
    return 0


def _compare(op: str, a: CellValue, b: CellValue) -> CellValue:
    if a is None:
        a = "" if isinstance(b, str) else (False if isinstance(b, bool) else 0.0)
    if b is None:
        b = "" if isinstance(a, str) else (False if isinstance(a, bool) else 0.0)
    ra, rb = _rank(a), _rank(b)
    if ra != rb:
        ka, kb = ra, rb
    elif ra == 1:
        ka, kb = a.lower(), b.lower()
    else:
        ka, kb = a, b
    if op == "=":
        return ka == kb
    if op == "<>":
        return ka != kb
    if op == "<":
        return ka < kb
    if op == "<=":
        return ka <= kb
    if op == ">":
        return ka > kb
    return ka >= kb


# -- functions ---------------------------------------------------------------

def _numbers(args, lookup) -> list[float] | CellError:
    """Collect numeric arguments the way SUM/AVERAGE/MIN/MAX do: ranges
    contribute only their numbers, direct scalars are coerced. A bare cell
    reference behaves like a one-cell range."""
    out: list[float] = []
    for a in args:
        v = _eval(a, lookup)
        if isinstance(a, Ref):
            v = _RangeValue([[v]])
        if isinstance(v, _RangeValue):
            for item in v.flat():
                if isinstance(item, CellError):
                    return item
                if isinstance(item, float) and not isinstance(item, bool):
                    out.append(item)
        else:
            n = to_number(v)
            if isinstance(n, CellError):
                return n
            out.append(n)
    return out


def _fsum(xs) -> float:
    try:
        return math.fsum(xs)
    except OverflowError:  # finite terms whose exact sum leaves the double range
        return math.inf


def _fn_sum(args, lookup):
    xs = _numbers(args, lookup)
    if isinstance(xs, CellError):
        return xs
    return finite_or_num(_fsum(xs))


def _fn_average(args, lookup):
    xs = _numbers(args, lookup)
    if isinstance(xs, CellError):
        return xs
    if not xs:
        return DIV0
    total = _fsum(xs)
    if math.isinf(total):
        return finite_or_num(_fsum(x / len(xs) for x in xs))
    return finite_or_num(total / len(xs))


def _fn_min(args, lookup):
    xs = _numbers(args, lookup)
    if isinstance(xs, CellError):
        return xs
    return min(xs) if xs else 0.0


def _fn_max(args, lookup):
    xs = _numbers(args, lookup)
    if isinstance(xs, CellError):
        return xs
    return max(xs) if xs else 0.0


def _scalar_args(args, lookup, n_min: int, n_max: int):
    if not n_min <= len(args) <= n_max:
        return VALUE
    out = []
    for a in args:
        n = to_number(_scalar(_eval(a, lookup)))
        if isinstance(n, CellError):
            return n
        out.append(n)
    return out


def _unary_math(fn):
    def call(args, lookup):
        xs = _scalar_args(args, lookup, 1, 1)
        if isinstance(xs, CellError):
            return xs
        return fn(xs[0])

    return call


def _sqrt(x):
    return NUM if x < 0 else math.sqrt(x)


def _exp(x):
    try:
        return finite_or_num(math.exp(x))
    except OverflowError:
        return NUM


def _ln(x):
    return NUM if x <= 0 else math.log(x)


def _fn_round(args, lookup):
    xs = _scalar_args(args, lookup, 1, 2)
    if isinstance(xs, CellError):
        return xs
    digits = int(xs[1]) if len(xs) == 2 else 0
    return round_half_away(xs[0], digits)


def _fn_if(args, lookup):
    if not 1 <= len(args) <= 3:
        return VALUE
    cond = to_bool(_scalar(_eval(args[0], lookup)))
    if isinstance(cond, CellError):
        return cond
    if cond:
        return _eval(args[1], lookup) if len(args) > 1 else True
    return _eval(args[2], lookup) if len(args) > 2 else False


def _fn_index(args, lookup):
    if not 2 <= len(args) <= 3 or not isinstance(args[0], Range):
        return VALUE
    rng = args[0].range
    idx = []
    for a in args[1:]:
        n = to_number(_scalar(_eval(a, lookup)))
        if isinstance(n, CellError):
            return n
        idx.append(int(n))  # host truncates toward zero
    if len(idx) == 1:
        # a single index walks a one-row or one-column range
        k = idx[0]
        if rng.n_cols == 1:
            r, c = k, 1
        elif rng.n_rows == 1:
            r, c = 1, k
        else:
            r, c = k, 1
    else:
        r, c = idx
    if not (1 <= r <= rng.n_rows and 1 <= c <= rng.n_cols):
        return REF
    return lookup(rng.at(r - 1, c - 1))


def _fn_npv(args, lookup):
    if len(args) < 2:
        return VALUE
    rate = to_number(_scalar(_eval(args[0], lookup)))
    if isinstance(rate, CellError):
        return rate
    flows = _numbers(args[1:], lookup)
    if isinstance(flows, CellError):
        return flows
    return npv(rate, flows)


_FUNCTIONS = {
    "SUM": _fn_sum,
    "AVERAGE": _fn_average,
    "MIN": _fn_min,
    "MAX": _fn_max,
    "ABS": _unary_math(abs),
    "ROUND": _fn_round,
    "SQRT": _unary_math(_sqrt),
    "EXP": _unary_math(_exp),
    "LN": _unary_math(_ln),
    "IF": _fn_if,
    "INDEX": _fn_index,
    "NPV": _fn_npv,
}
