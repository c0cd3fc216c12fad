"""Workbook model: cells, roles, base case, dependency graph, recalculation."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union

from .address import CellAddress, parse_address
from .errors import ProtectionError, RoleError, UnknownAddressError
from .evaluator import evaluate_expr
from .formula import Expr, dependencies, parse_formula, print_formula
from .values import CYCLE, CellValue, is_number


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class NumberLiteral:
    value: float


@dataclass(frozen=True)
class TextLiteral:
    value: str


@dataclass(frozen=True)
class Formula:
    source: str = field(compare=False)
    ast: Expr

    @classmethod
    def parse(cls, source: str) -> Formula:
        return cls(source.strip(), parse_formula(source))

    @classmethod
    def from_ast(cls, ast: Expr) -> Formula:
        return cls(print_formula(ast), ast)


CellContent = Union[Empty, NumberLiteral, TextLiteral, Formula]


def make_content(value) -> CellContent:
    """Coerce a Python value into cell content: numbers become literals,
    strings starting with ``=`` become formulas, other strings text."""
    if isinstance(value, (Empty, NumberLiteral, TextLiteral, Formula)):
        return value
    if value is None:
        return Empty()
    if isinstance(value, bool):
        raise TypeError("boolean literals are not cell content; use =TRUE()")
    if isinstance(value, (int, float)):
        return NumberLiteral(float(value))
    if isinstance(value, str):
        if value.lstrip().startswith("="):
            return Formula.parse(value)
        return TextLiteral(value)
    raise TypeError(f"cannot store {type(value).__name__} in a cell")


class RoleKind(enum.Enum):
    DATA = "data"
    DECISION = "decision"
    OUTPUT = "output"
    PERFORMANCE = "performance"

    @property
    def is_input(self) -> bool:
        return self in (RoleKind.DATA, RoleKind.DECISION)


@dataclass(frozen=True)
class Role:
    kind: RoleKind
    label: str = ""


@dataclass(frozen=True)
class Snapshot:
    """Literal input values; never formulas."""

    values: Mapping[CellAddress, float]
    taken_at_base: bool = False


AddressLike = Union[CellAddress, str]


def as_address(a: AddressLike) -> CellAddress:
    if isinstance(a, CellAddress):
        return a.relative()
    return parse_address(a).relative()


class Workbook:
    """A single-sheet grid plus role annotations.

    Formula values are cached. Edits mark cells stale; the next
    :meth:`evaluate` or :meth:`recalculate` recomputes exactly the transitive
    dependents of the stale cells, in topological order.
    """

    def __init__(self):
        self.cells: dict[CellAddress, CellContent] = {}
        self.roles: dict[CellAddress, Role] = {}
        self.benchmarks: dict[CellAddress, float] = {}
        self.base_case: Snapshot = Snapshot({}, taken_at_base=True)
        self.scenarios = None
        self._precedents: dict[CellAddress, frozenset[CellAddress]] = {}
        self._dependents: dict[CellAddress, set[CellAddress]] = {}
        self._order: dict[CellAddress, int] | None = None
        self._cyclic: set[CellAddress] = set()
        self._values: dict[CellAddress, CellValue] = {}
        self._stale: set[CellAddress] = set()
        self.last_recomputed: list[CellAddress] = []

    # -- cell access ---------------------------------------------------------

    def __contains__(self, addr) -> bool:
        return as_address(addr) in self.cells

    def content(self, addr: AddressLike) -> CellContent:
        return self.cells.get(as_address(addr), Empty())

    def role(self, addr: AddressLike) -> Role | None:
        return self.roles.get(as_address(addr))

    def label(self, addr: AddressLike) -> str:
        r = self.role(addr)
        return r.label if r and r.label else str(as_address(addr))

    def set_cell(self, addr: AddressLike, content, force: bool = False) -> Workbook:
        addr = as_address(addr)
        content = make_content(content)
        old = self.cells.get(addr, Empty())
        if content == old:
            return self
        role = self.roles.get(addr)
        if role is not None:
            if role.kind.is_input and not isinstance(content, NumberLiteral):
                if not force:
                    raise ProtectionError(f"{addr} is a {role.kind.value} input and must hold a number")
                self._drop_role(addr)
            elif not role.kind.is_input and not isinstance(content, Formula):
                if not force:
                    raise ProtectionError(f"{addr} is a protected {role.kind.value} formula cell")
                self._drop_role(addr)
        self._store(addr, content)
        return self

    def _drop_role(self, addr: CellAddress) -> None:
        self.roles.pop(addr, None)
        self.benchmarks.pop(addr, None)

    def _store(self, addr: CellAddress, content: CellContent) -> None:
        old = self.cells.get(addr)
        if isinstance(content, Empty):
            self.cells.pop(addr, None)
        else:
            self.cells[addr] = content
        was_formula = isinstance(old, Formula)
        if was_formula or isinstance(content, Formula):
            self._set_precedents(addr, dependencies(content.ast) if isinstance(content, Formula) else frozenset())
            self._order = None
        if isinstance(content, NumberLiteral):
            self._values[addr] = content.value
        elif isinstance(content, TextLiteral):
            self._values[addr] = content.value
        elif isinstance(content, Empty):
            self._values.pop(addr, None)
        self._stale.add(addr)

    def set_value(self, addr: AddressLike, value: float) -> None:
        """Fast path for analysis loops: overwrite an input literal."""
        addr = as_address(addr)
        content = self.cells.get(addr)
        if isinstance(content, NumberLiteral) and content.value == value:
            return
        if isinstance(content, Formula):
            self.set_cell(addr, value)  # raises unless unprotected
            return
        self.cells[addr] = NumberLiteral(float(value))
        self._values[addr] = float(value)
        self._stale.add(addr)

    def assign_role(self, addr: AddressLike, kind: RoleKind | str, label: str = "") -> None:
        addr = as_address(addr)
        kind = RoleKind(kind)
        if addr in self.roles:
            raise RoleError(f"{addr} already has role {self.roles[addr].kind.value}")
        content = self.cells.get(addr)
        if kind.is_input and not isinstance(content, NumberLiteral):
            raise RoleError(f"{kind.value} role requires a number literal at {addr}")
        if not kind.is_input and not isinstance(content, Formula):
            raise RoleError(f"{kind.value} role requires a formula at {addr}")
        self.roles[addr] = Role(kind, label)

    def addresses_with(self, *kinds: RoleKind) -> list[CellAddress]:
        return sorted(a for a, r in self.roles.items() if r.kind in kinds)

    @property
    def inputs(self) -> list[CellAddress]:
        return self.addresses_with(RoleKind.DATA, RoleKind.DECISION)

    @property
    def performance_measures(self) -> list[CellAddress]:
        return self.addresses_with(RoleKind.PERFORMANCE)

    def is_input(self, addr: AddressLike) -> bool:
        r = self.role(addr)
        return r is not None and r.kind.is_input

    # -- graph ---------------------------------------------------------------

    def _set_precedents(self, addr: CellAddress, deps) -> None:
        for p in self._precedents.get(addr, ()):
            s = self._dependents.get(p)
            if s is not None:
                s.discard(addr)
                if not s:
                    del self._dependents[p]
        deps = frozenset(deps)
        if deps:
            self._precedents[addr] = deps
            for p in deps:
                self._dependents.setdefault(p, set()).add(addr)
        else:
            self._precedents.pop(addr, None)

    def precedents(self, addr: AddressLike) -> frozenset[CellAddress]:
        return self._precedents.get(as_address(addr), frozenset())

    def dependents(self, addr: AddressLike) -> set[CellAddress]:
        return set(self._dependents.get(as_address(addr), ()))

    def _build_order(self) -> None:
        formulas = [a for a, c in self.cells.items() if isinstance(c, Formula)]
        indeg = {a: 0 for a in formulas}
        for a in formulas:
            for p in self._precedents.get(a, ()):
                if p in indeg:
                    indeg[a] += 1
        queue = deque(sorted(a for a, d in indeg.items() if d == 0))
        order: dict[CellAddress, int] = {}
        while queue:
            a = queue.popleft()
            order[a] = len(order)
            for d in sorted(self._dependents.get(a, ())):
                if d in indeg:
                    indeg[d] -= 1
                    if indeg[d] == 0:
                        queue.append(d)
        self._order = order
        self._cyclic = {a for a in formulas if a not in order}

    @property
    def cyclic_cells(self) -> set[CellAddress]:
        """Cells that are on a cycle or downstream of one."""
        if self._order is None:
            self._build_order()
        return set(self._cyclic)

    def cycle_members(self) -> list[CellAddress]:
        """Cells lying on a cycle (downstream-only cells pruned)."""
        remaining = self.cyclic_cells
        changed = True
        while changed:
            changed = False
            for a in sorted(remaining):
                if not (self._dependents.get(a, set()) & remaining):
                    remaining.discard(a)
                    changed = True
        return sorted(remaining)

    def depends_on(self, cell: AddressLike, upstream: AddressLike) -> bool:
        """Whether ``cell`` transitively references ``upstream``."""
        cell, upstream = as_address(cell), as_address(upstream)
        return cell in self._affected({upstream})

    def _affected(self, changed: Iterable[CellAddress]) -> set[CellAddress]:
        seen: set[CellAddress] = set()
        stack = list(changed)
        while stack:
            a = stack.pop()
            for d in self._dependents.get(a, ()):
                if d not in seen:
                    seen.add(d)
                    stack.append(d)
        return seen

    # -- evaluation ----------------------------------------------------------

    def _lookup(self, addr: CellAddress) -> CellValue:
        return self._values.get(addr)

    def _compute(self, addrs: Iterable[CellAddress]) -> None:
        if self._order is None:
            self._build_order()
        order = self._order
        cyclic = [a for a in addrs if a in self._cyclic]
        ordinary = sorted((a for a in addrs if a in order), key=order.__getitem__)
        for a in cyclic:
            self._values[a] = CYCLE
        for a in ordinary:
            self._values[a] = evaluate_expr(self.cells[a].ast, self._lookup)
        self.last_recomputed = ordinary + sorted(cyclic)

    def recalculate(self, changed: Iterable[AddressLike] = ()) -> dict[CellAddress, CellValue]:
        """Recompute the transitive dependents of ``changed`` plus any cells
        edited since the last recalculation. Returns the full value map."""
        dirty = self._stale | {as_address(a) for a in changed}
        self._stale = set()
        if self._order is None:
            self._build_order()
        targets = self._affected(dirty)
        targets.update(a for a in dirty if isinstance(self.cells.get(a), Formula))
        self._compute(targets)
        return dict(self._values)

    def calculate_all(self) -> dict[CellAddress, CellValue]:
        """Full from-scratch recalculation of every formula cell."""
        self._stale = set()
        self._values = {a: c.value for a, c in self.cells.items() if isinstance(c, (NumberLiteral, TextLiteral))}
        self._build_order()
        self._compute([a for a, c in self.cells.items() if isinstance(c, Formula)])
        return dict(self._values)

    def evaluate(self, addr: AddressLike) -> CellValue:
        addr = as_address(addr)
        if addr not in self.cells:
            raise UnknownAddressError([addr])
        if self._stale:
            self.recalculate()
        return self._values.get(addr)

    def values(self) -> dict[CellAddress, CellValue]:
        if self._stale:
            self.recalculate()
        return dict(self._values)

    # -- base case -----------------------------------------------------------

    def snapshot_inputs(self, taken_at_base: bool = False) -> Snapshot:
        return Snapshot({a: self.cells[a].value for a in self.inputs}, taken_at_base)

    def restore_inputs(self, snap: Snapshot) -> Workbook:
        missing = [a for a in snap.values if a not in self.cells]
        if missing:
            raise UnknownAddressError(sorted(missing))
        for a, v in snap.values.items():
            self.set_value(a, v)
        self.recalculate()
        return self

    def mark_base_case(self) -> None:
        """Record the current inputs as the base case and freeze each
        performance measure's current value as its benchmark."""
        self.base_case = self.snapshot_inputs(taken_at_base=True)
        self.benchmarks = {}
        for a in self.performance_measures:
            v = self.evaluate(a)
            if is_number(v):
                self.benchmarks[a] = v

    def at_base_case(self) -> bool:
        return all(
            isinstance(self.cells.get(a), NumberLiteral) and self.cells[a].value == v
            for a, v in self.base_case.values.items()
        )

    def change_from_base(self, addr: AddressLike) -> float | None:
        addr = as_address(addr)
        bench = self.benchmarks.get(addr)
        v = self.evaluate(addr)
        if bench is None or not is_number(v):
            return None
        return v - bench

    # -- copying -------------------------------------------------------------

    def copy(self) -> Workbook:
        wb = Workbook.__new__(Workbook)
        wb.cells = dict(self.cells)
        wb.roles = dict(self.roles)
        wb.benchmarks = dict(self.benchmarks)
        wb.base_case = self.base_case
        wb.scenarios = self.scenarios
        wb._precedents = dict(self._precedents)
        wb._dependents = {k: set(v) for k, v in self._dependents.items()}
        wb._order = None if self._order is None else dict(self._order)
        wb._cyclic = set(self._cyclic)
        wb._values = dict(self._values)
        wb._stale = set(self._stale)
        wb.last_recomputed = []
        return wb

    def state(self) -> tuple:
        """Comparable fingerprint of contents and current values."""
        return (dict(self.cells), self.values())


def snapshot_inputs(wb: Workbook) -> Snapshot:
    return wb.snapshot_inputs()


def restore_inputs(wb: Workbook, snap: Snapshot) -> Workbook:
    return wb.restore_inputs(snap)


def set_cell(wb: Workbook, addr: AddressLike, content, force: bool = False) -> Workbook:
    return wb.set_cell(addr, content, force=force)
