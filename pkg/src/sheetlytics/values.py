"""Cell values.

A value is a ``float``, ``str``, ``bool``, :class:`CellError`, or ``None`` for
an empty cell. Numbers are always finite.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal, localcontext
from typing import Union


class ErrorCode(enum.Enum):
    DIV0 = "#DIV/0!"
    VALUE = "#VALUE!"
    REF = "#REF!"
    NAME = "#NAME?"
    NUM = "#NUM!"
    CYCLE = "#CYCLE!"


@dataclass(frozen=True)
class CellError:
    code: ErrorCode

    def __str__(self) -> str:
        return self.code.value


DIV0 = CellError(ErrorCode.DIV0)
VALUE = CellError(ErrorCode.VALUE)
REF = CellError(ErrorCode.REF)
NAME = CellError(ErrorCode.NAME)
NUM = CellError(ErrorCode.NUM)
CYCLE = CellError(ErrorCode.CYCLE)

CellValue = Union[float, str, bool, CellError, None]


def is_error(v) -> bool:
    return isinstance(v, CellError)


def is_number(v) -> bool:
    return isinstance(v, float) and not isinstance(v, bool)


def finite_or_num(x: float) -> CellValue:
    if math.isfinite(x):
        return float(x)
    return NUM


def round_half_away(x: float, digits: int = 0) -> float:
    """Round half away from zero on the shortest decimal representation,
    so ROUND(2.675, 2) is 2.68 rather than the binary-exact 2.67."""
    if digits > 340:
        return float(x)
    if digits < -310:
        return 0.0 * x
    with localcontext() as ctx:
        ctx.prec = 800
        d = Decimal(repr(float(x)))
        return float(d.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_UP))


def display(v: CellValue, decimals: int | None = None) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, CellError):
        return str(v)
    if isinstance(v, float):
        if decimals is None:
            return repr(v)
        return f"{round_half_away(v, decimals):.{decimals}f}"
    return str(v)


def to_json(v: CellValue):
    """Numbers stay numbers (json emits the shortest round-trip repr);
    errors become their display string."""
    if isinstance(v, CellError):
        return str(v)
    return v
