"""A1-notation cell addresses and rectangular ranges."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterator

from .errors import AddressError

_ADDR_RE = re.compile(r"^(\$?)([A-Za-z]+)(\$?)([0-9]+)$")


def column_to_index(letters: str) -> int:
    """'A' -> 1, 'Z' -> 26, 'AA' -> 27."""
    if not letters:
        raise AddressError("empty column letters")
    col = 0
    for ch in letters.upper():
        if not "A" <= ch <= "Z":
            raise AddressError(f"invalid column letter {ch!r}")
        col = col * 26 + (ord(ch) - ord("A") + 1)
    return col


def index_to_column(index: int) -> str:
    if index < 1:
        raise AddressError(f"column ordinal must be >= 1, got {index}")
    letters = []
    while index:
        index, rem = divmod(index - 1, 26)
        letters.append(chr(ord("A") + rem))
    return "".join(reversed(letters))


@dataclass(frozen=True)
class CellAddress:
    """A single cell. The ``$`` flags are kept for printing only and are
    ignored by equality and hashing."""

    column: int
    row: int
    col_absolute: bool = field(default=False, compare=False)
    row_absolute: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.column < 1 or self.row < 1:
            raise AddressError(f"column and row must be >= 1, got ({self.column}, {self.row})")

    @property
    def column_letters(self) -> str:
        return index_to_column(self.column)

    @property
    def sort_key(self) -> tuple[int, int]:
        return (self.row, self.column)

    def __lt__(self, other: CellAddress) -> bool:
        return self.sort_key < other.sort_key

    def relative(self) -> CellAddress:
        return CellAddress(self.column, self.row)

    def a1(self) -> str:
        """Print with ``$`` markers preserved."""
        return (
            ("$" if self.col_absolute else "")
            + self.column_letters
            + ("$" if self.row_absolute else "")
            + str(self.row)
        )

    def __str__(self) -> str:
        return f"{self.column_letters}{self.row}"

    def __repr__(self) -> str:
        return f"CellAddress({self.a1()!r})"


def parse_address(text: str) -> CellAddress:
    m = _ADDR_RE.match(text.strip())
    if not m:
        raise AddressError(f"malformed cell address {text!r}")
    col_abs, letters, row_abs, digits = m.groups()
    row = int(digits)
    if row < 1:
        raise AddressError(f"row must be >= 1 in {text!r}")
    return CellAddress(column_to_index(letters), row, bool(col_abs), bool(row_abs))


@dataclass(frozen=True)
class CellRange:
    start: CellAddress
    end: CellAddress

    def __post_init__(self):
        s, e = self.start, self.end
        if s.column > e.column or s.row > e.row:
            # normalize corners, keeping each corner's $ flags on its own axis
            c0, c1 = sorted([(s.column, s.col_absolute), (e.column, e.col_absolute)], key=lambda t: t[0])
            r0, r1 = sorted([(s.row, s.row_absolute), (e.row, e.row_absolute)], key=lambda t: t[0])
            object.__setattr__(self, "start", CellAddress(c0[0], r0[0], c0[1], r0[1]))
            object.__setattr__(self, "end", CellAddress(c1[0], r1[0], c1[1], r1[1]))

    @property
    def n_rows(self) -> int:
        return self.end.row - self.start.row + 1

    @property
    def n_cols(self) -> int:
        return self.end.column - self.start.column + 1

    def __len__(self) -> int:
        return self.n_rows * self.n_cols

    def cells(self) -> Iterator[CellAddress]:
        """Row-major iteration."""
        for r in range(self.start.row, self.end.row + 1):
            for c in range(self.start.column, self.end.column + 1):
                yield CellAddress(c, r)

    def at(self, row_offset: int, col_offset: int) -> CellAddress:
        return CellAddress(self.start.column + col_offset, self.start.row + row_offset)

    def a1(self) -> str:
        return f"{self.start.a1()}:{self.end.a1()}"

    def __str__(self) -> str:
        return f"{self.start}:{self.end}"


def parse_range(text: str) -> CellRange:
    parts = text.strip().split(":")
    if len(parts) == 1:
        a = parse_address(parts[0])
        return CellRange(a, a)
    if len(parts) != 2:
        raise AddressError(f"malformed range {text!r}")
    return CellRange(parse_address(parts[0]), parse_address(parts[1]))
