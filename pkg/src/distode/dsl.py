"""Text syntax for smooth expressions and distributions.

Grammar, loosest binding first::

    dist   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('-' | '+') unary | power
    power  := atom ('^' exponent)?
    atom   := NUMBER | 'i' | 'x' | 'pi'
            | ('exp' | 'sin' | 'cos') '(' dist ')'
            | 'H' '(' shift ')' | 'Hm' '(' shift ')'
            | 'delta' "'"* ('^' INT)? '(' shift ')'
            | '(' dist ')'
    shift  := 'x' (('+' | '-') NUMBER)?

A number immediately followed by ``i`` is imaginary (``3i``).  ``*`` is the
star product; between smooth operands it is the ordinary product.  ``/`` and
``^`` require smooth right (respectively left) operands.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .distcore import PiecewiseDist, as_dist
from .errors import ConstructionError, DslSyntaxError
from .smoothfn import (
    ONE,
    SmoothExpr,
    X,
    Const,
    add,
    div,
    format_number,
    func,
    mul,
    power,
    _format_real,
)
from .staralg import star

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()',])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    text = text.replace("−", "-").replace("′", "'")
    tokens: list[Token] = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DslSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "ws":
            chunk = m.group()
            if "\n" in chunk:
                line += chunk.count("\n")
                line_start = pos + chunk.rindex("\n") + 1
        else:
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# ---------------------------------------------------------------------------
# syntax tree


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Call:
    name: str
    arg: object


@dataclass(frozen=True)
class Step:
    minus: bool
    point: float


@dataclass(frozen=True)
class Delta:
    order: int
    point: float


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Neg:
    operand: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, tok: Token | None = None) -> DslSyntaxError:
        tok = tok or self.tok
        return DslSyntaxError(message, tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "name") and self.tok.text == text:
            self.pos += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.tok.kind in ("op", "name") and self.tok.text == text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def parse(self):
        node = self.dist()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")
        return node

    def dist(self):
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        if self.accept("-"):
            return Neg(self.unary())
        if self.accept("+"):
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.integer())
        return base

    def integer(self) -> int:
        start = self.tok
        sign = 1
        if self.accept("("):
            value = self.integer()
            self.expect(")")
            return value
        while self.tok.kind == "op" and self.tok.text in "+-":
            if self.advance().text == "-":
                sign = -sign
        if self.tok.kind != "num" or self.tok.text.endswith("i"):
            raise self.error("exponent must be an integer", start)
        value = float(self.advance().text)
        if not value.is_integer():
            raise self.error("exponent must be an integer", start)
        return sign * int(value)

    def number(self) -> float:
        tok = self.tok
        if tok.kind != "num" or tok.text.endswith("i"):
            raise self.error("expected a real number")
        self.advance()
        return float(tok.text)

    def shift(self) -> float:
        self.expect("(")
        if not (self.tok.kind == "name" and self.tok.text == "x"):
            raise self.error("expected 'x' in shift argument")
        self.advance()
        point = 0.0
        if self.tok.kind == "op" and self.tok.text in "+-":
            sign = self.advance().text
            value = self.number()
            point = -value if sign == "+" else value
        self.expect(")")
        return point

    def atom(self):
        tok = self.tok
        if tok.kind == "num":
            self.advance()
            if tok.text.endswith("i"):
                return Num(complex(0.0, float(tok.text[:-1])))
            return Num(complex(float(tok.text)))
        if tok.kind == "name":
            name = tok.text
            if name == "x":
                self.advance()
                return Var()
            if name == "i":
                self.advance()
                return Num(1j)
            if name == "pi":
                self.advance()
                return Num(complex(math.pi))
            if name in ("exp", "sin", "cos"):
                self.advance()
                self.expect("(")
                arg = self.dist()
                self.expect(")")
                return Call(name, arg)
            if name in ("H", "Hm"):
                self.advance()
                return Step(name == "Hm", self.shift())
            if name == "delta":
                self.advance()
                order = 0
                while self.accept("'"):
                    order += 1
                if self.accept("^"):
                    if order:
                        raise self.error("use either primes or '^k' for the delta order")
                    order = self.integer()
                    if order < 0:
                        raise self.error("delta order must be non-negative")
                return Delta(order, self.shift())
            raise self.error(f"unknown name {name!r}")
        if self.accept("("):
            node = self.dist()
            self.expect(")")
            return node
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def parse(text: str):
    """Parse ``text`` into a syntax tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# lowering


def _require_smooth(value, what: str) -> SmoothExpr:
    if not isinstance(value, SmoothExpr):
        raise ConstructionError(f"lowering error: {what} must be a smooth expression")
    return value


def lower(node):
    """Lower a syntax tree to a :class:`SmoothExpr` when possible, else a :class:`PiecewiseDist`."""
    if isinstance(node, Num):
        return Const(node.value)
    if isinstance(node, Var):
        return X
    if isinstance(node, Call):
        return func(node.name, _require_smooth(lower(node.arg), f"the argument of {node.name}"))
    if isinstance(node, Step):
        if node.minus:
            return PiecewiseDist.heaviside_minus(node.point)
        return PiecewiseDist.heaviside(node.point)
    if isinstance(node, Delta):
        return PiecewiseDist.delta(node.order, node.point)
    if isinstance(node, Neg):
        value = lower(node.operand)
        return mul(-1, value) if isinstance(value, SmoothExpr) else value.scale(-1)
    if isinstance(node, Pow):
        return power(_require_smooth(lower(node.base), "the base of '^'"), node.exponent)
    if isinstance(node, BinOp):
        left, right = lower(node.left), lower(node.right)
        both_smooth = isinstance(left, SmoothExpr) and isinstance(right, SmoothExpr)
        if node.op == "+":
            return add(left, right) if both_smooth else as_dist(left) + as_dist(right)
        if node.op == "-":
            return add(left, mul(-1, right)) if both_smooth else as_dist(left) - as_dist(right)
        if node.op == "*":
            return mul(left, right) if both_smooth else star(left, right)
        if node.op == "/":
            den = _require_smooth(right, "the denominator")
            if both_smooth:
                return div(left, den)
            return star(left, div(ONE, den))
    raise ConstructionError(f"lowering error: unsupported node {node!r}")


def parse_smooth(text: str) -> SmoothExpr:
    return _require_smooth(lower(parse(text)), "the expression")


def parse_dist(text: str) -> PiecewiseDist:
    return as_dist(lower(parse(text)))


# ---------------------------------------------------------------------------
# printing


def _shift_text(x0: float) -> str:
    if x0 == 0:
        return "x"
    if x0 > 0:
        return f"x-{_format_real(x0)}"
    return f"x+{_format_real(-x0)}"


def print_expr(e: SmoothExpr) -> str:
    if e.has_leaf():
        raise ValueError("numerical pieces have no text form")
    return e.key


def print_dist(F: PiecewiseDist) -> str:
    """DSL text that parses back to ``F``."""
    terms: list[str] = []
    bps = F.breakpoints
    m = len(bps)
    for i, piece in enumerate(F.pieces):
        if piece.is_zero():
            continue
        body = print_expr(piece)
        if m == 0:
            terms.append(body)
        elif i == 0:
            terms.append(f"({body})*Hm({_shift_text(bps[0])})")
        elif i == m:
            terms.append(f"({body})*H({_shift_text(bps[-1])})")
        else:
            terms.append(f"({body})*(H({_shift_text(bps[i - 1])}) - H({_shift_text(bps[i])}))")
    for (i, j), c in sorted(F.deltas.items()):
        name = "delta" if j == 0 else f"delta^{j}"
        atom = f"{name}({_shift_text(bps[i])})"
        if c == 1:
            terms.append(atom)
        else:
            coef = format_number(c)
            if coef.startswith("-"):
                coef = f"({coef})"
            terms.append(f"{coef}*{atom}")
    return " + ".join(terms) if terms else "0"
