"""Formula language: tokenizer, recursive-descent parser, printer.

Precedence, loosest first::

    comparison  = <> < <= > >=      (left-assoc)
    additive    + -                 (left-assoc)
    term        * /                 (left-assoc)
    unary       - +                 (prefix)
    power       ^                   (right-assoc, binds tighter than unary)

so ``-2^2`` is ``-(2^2)`` and ``2^3^2`` is ``2^(3^2)``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Union

from .address import CellAddress, CellRange, column_to_index
from .errors import FormulaSyntaxError

SUPPORTED_FUNCTIONS = frozenset(
    {"SUM", "AVERAGE", "MIN", "MAX", "ABS", "ROUND", "SQRT", "EXP", "LN", "IF", "INDEX", "NPV"}
)
COMPARISON_OPS = ("=", "<>", "<", "<=", ">", ">=")
BINARY_OPS = ("+", "-", "*", "/", "^") + COMPARISON_OPS


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Str:
    value: str


@dataclass(frozen=True)
class Bool:
    value: bool


@dataclass(frozen=True)
class Ref:
    address: CellAddress


@dataclass(frozen=True)
class Range:
    range: CellRange


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


Expr = Union[Num, Str, Bool, Ref, Range, Unary, Binary, Call]


# -- tokenizer ---------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<ref>\$?[A-Za-z]+\$?\d+(?![A-Za-z0-9_.(]))
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op><>|<=|>=|[-+*/^=<>])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<colon>:)
    """,
    re.VERBOSE,
)

_REF_RE = re.compile(r"^(\$?)([A-Za-z]+)(\$?)(\d+)$")


@dataclass
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


def _ref_from_text(text: str, pos: int, source: str) -> CellAddress:
    m = _REF_RE.match(text)
    col_abs, letters, row_abs, digits = m.groups()
    if int(digits) < 1:
        raise FormulaSyntaxError(f"bad cell reference {text!r}", pos, source)
    return CellAddress(column_to_index(letters), int(digits), bool(col_abs), bool(row_abs))


# -- parser ------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str, offset: int):
        self.source = source
        self.tokens = tokenize(source[offset:])
        for t in self.tokens:
            t.pos += offset
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        shown = tok.text or "end of formula"
        return FormulaSyntaxError(f"{message}, found {shown!r}", tok.pos, self.source)

    def expect(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.advance()

    def parse(self) -> Expr:
        expr = self.comparison()
        if self.tok.kind != "end":
            raise self.error("unexpected token")
        return expr

    def comparison(self) -> Expr:
        left = self.additive()
        while self.tok.kind == "op" and self.tok.text in COMPARISON_OPS:
            op = self.advance().text
            left = Binary(op, left, self.additive())
        return left

    def additive(self) -> Expr:
        left = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            left = Binary(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/"):
            op = self.advance().text
            left = Binary(op, left, self.unary())
        return left

    def unary(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text in ("-", "+"):
            op = self.advance().text
            return Unary(op, self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.primary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def primary(self) -> Expr:
        tok = self.tok
        if tok.kind == "number":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "string":
            self.advance()
            return Str(tok.text[1:-1].replace('""', '"'))
        if tok.kind == "lparen":
            self.advance()
            inner = self.comparison()
            self.expect("rparen", "')'")
            return inner
        if tok.kind == "ref":
            self.advance()
            start = _ref_from_text(tok.text, tok.pos, self.source)
            if self.tok.kind == "colon":
                self.advance()
                end_tok = self.expect("ref", "cell reference after ':'")
                end = _ref_from_text(end_tok.text, end_tok.pos, self.source)
                return Range(CellRange(start, end))
            return Ref(start)
        if tok.kind == "ident":
            self.advance()
            name = tok.text.upper()
            if self.tok.kind == "lparen":
                self.advance()
                return Call(name, tuple(self.arguments()))
            if name in ("TRUE", "FALSE"):
                return Bool(name == "TRUE")
            raise self.error("unknown name", tok)
        raise self.error("expected a value")

    def arguments(self) -> list:
        args = []
        if self.tok.kind == "rparen":
            self.advance()
            return args
        while True:
            args.append(self.comparison())
            if self.tok.kind == "comma":
                self.advance()
                continue
            self.expect("rparen", "',' or ')'")
            return args


def parse_formula(text: str) -> Expr:
    """Parse ``=...`` into an expression tree.

    Unknown function names parse fine and become ``#NAME?`` at evaluation.
    """
    stripped = text.lstrip()
    if not stripped.startswith("="):
        raise FormulaSyntaxError("formula must begin with '='", 0, text)
    offset = len(text) - len(stripped) + 1
    return _Parser(text, offset).parse()


# -- printer -----------------------------------------------------------------

_PREC = {"=": 1, "<>": 1, "<": 1, "<=": 1, ">": 1, ">=": 1, "+": 2, "-": 2, "*": 3, "/": 3, "^": 5}
_UNARY_PREC = 4
_ATOM_PREC = 6


def format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return _PREC[e.op]
    if isinstance(e, Unary):
        return _UNARY_PREC
    if isinstance(e, Num) and e.value < 0:
        return _UNARY_PREC
    return _ATOM_PREC


def _wrap(e: Expr, min_prec: int) -> str:
    s = to_source(e)
    return f"({s})" if _prec(e) < min_prec else s


def to_source(e: Expr) -> str:
    """Canonical text without the leading ``=``; parses back to ``e``."""
    if isinstance(e, Num):
        return format_number(e.value)
    if isinstance(e, Str):
        return '"' + e.value.replace('"', '""') + '"'
    if isinstance(e, Bool):
        return "TRUE" if e.value else "FALSE"
    if isinstance(e, Ref):
        return e.address.a1()
    if isinstance(e, Range):
        return e.range.a1()
    if isinstance(e, Unary):
        return e.op + _wrap(e.operand, _UNARY_PREC)
    if isinstance(e, Binary):
        p = _PREC[e.op]
        if e.op == "^":
            return f"{_wrap(e.left, _ATOM_PREC)}^{_wrap(e.right, _UNARY_PREC)}"
        return f"{_wrap(e.left, p)}{e.op}{_wrap(e.right, p + 1)}"
    if isinstance(e, Call):
        return f"{e.name}({','.join(to_source(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def print_formula(e: Expr) -> str:
    return "=" + to_source(e)


# -- analysis ----------------------------------------------------------------

def walk(e: Expr) -> Iterator[Expr]:
    yield e
    if isinstance(e, Unary):
        yield from walk(e.operand)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk(a)


def dependencies(e: Expr) -> set[CellAddress]:
    """Every referenced cell, ranges expanded. Both IF branches count."""
    deps: set[CellAddress] = set()
    for node in walk(e):
        if isinstance(node, Ref):
            deps.add(node.address.relative())
        elif isinstance(node, Range):
            deps.update(node.range.cells())
    return deps
