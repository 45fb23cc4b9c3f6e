"""Smooth complex-valued functions of one real variable.

Expressions are immutable trees built from complex constants, the variable
``x``, sums, products with integer powers (negative powers encode division)
and the unary functions ``exp``, ``sin`` and ``cos``.  The smart constructors
keep trees in a light normal form: constants are folded, like terms are
collected and powers of equal bases are merged.  Semantic equality is never
decided from the normal form; compare sampled values instead.

Two evaluation modes are provided.  ``expr(xs)`` evaluates on a numpy array
and ``expr.taylor(x0, k)`` returns Taylor coefficients at ``x0`` using
truncated power-series arithmetic, which keeps high-order jets cheap.

Opaque numerical functions (dense ODE output, for instance) enter the algebra
by subclassing :class:`Leaf`.
"""

from __future__ import annotations

import cmath
import math
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ConstructionError, EvaluationError

__all__ = [
    "SmoothExpr",
    "Const",
    "Var",
    "Func",
    "Sum",
    "Prod",
    "Leaf",
    "X",
    "ZERO",
    "ONE",
    "I",
    "as_expr",
    "const",
    "add",
    "mul",
    "power",
    "div",
    "exp",
    "sin",
    "cos",
    "compose",
    "combine",
    "diff",
    "eval_jet",
    "format_number",
]

Number = complex | float | int


def format_number(value: Number) -> str:
    """Shortest text that parses back to exactly ``value``."""
    c = complex(value)
    if c.imag == 0.0:
        return _format_real(c.real)
    if c.real == 0.0:
        return _format_real(c.imag) + "i"
    sign = "+" if c.imag >= 0 else "-"
    return f"({_format_real(c.real)}{sign}{_format_real(abs(c.imag))}i)"


def _format_real(v: float) -> str:
    v = float(v)
    if v == 0.0:
        return "0"
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def _is_atomic_number(c: complex) -> bool:
    return c.imag == 0.0 and c.real >= 0


class SmoothExpr:
    """Base class for all expression nodes."""

    __slots__ = ("_text", "_hash", "_d1")
    kind = "?"

    def __init__(self) -> None:
        self._text: str | None = None
        self._hash: int | None = None
        self._d1: SmoothExpr | None = None

    # -- identity -----------------------------------------------------------
    @property
    def key(self) -> str:
        if self._text is None:
            self._text = self._render()
        return self._text

    def _render(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self.key

    def __repr__(self) -> str:
        return f"SmoothExpr({self.key!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SmoothExpr):
            return NotImplemented
        return self is other or self.key == other.key

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def children(self) -> tuple[SmoothExpr, ...]:
        return ()

    @property
    def is_const(self) -> bool:
        return False

    def is_zero(self) -> bool:
        return False

    def has_leaf(self) -> bool:
        return any(c.has_leaf() for c in self.children())

    # -- arithmetic -----------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, mul(-1, as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), mul(-1, self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, p: int):
        return power(self, p)

    def __neg__(self):
        return mul(-1, self)

    # -- calculus -------------------------------------------------------------
    def derivative(self) -> SmoothExpr:
        if self._d1 is None:
            self._d1 = self._derivative()
        return self._d1

    def _derivative(self) -> SmoothExpr:
        raise NotImplementedError

    def diff(self, k: int = 1) -> SmoothExpr:
        return diff(self, k)

    # -- evaluation -----------------------------------------------------------
    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = self.evaluate(arr.reshape(-1)).reshape(arr.shape)
        if arr.ndim == 0:
            return complex(out)
        return out

    def evaluate(self, xs: np.ndarray) -> np.ndarray:
        """Vectorised evaluation on a 1-d float array."""
        return _evaluate(self, np.asarray(xs, dtype=float), {})

    def _eval(self, xs: np.ndarray, memo: dict) -> np.ndarray:
        raise NotImplementedError

    def taylor(self, x0: float, k: int) -> np.ndarray:
        """Taylor coefficients ``c_j = f^(j)(x0)/j!`` for ``j = 0..k``."""
        return _taylor(self, float(x0), int(k), {})

    def _taylor(self, x0: float, k: int, memo: dict) -> np.ndarray:
        raise NotImplementedError

    def jet(self, x0: float, k: int) -> np.ndarray:
        """``(f(x0), f'(x0), ..., f^(k)(x0))`` as a complex vector."""
        return eval_jet(self, x0, k)

    def substitute(self, inner: SmoothExpr) -> SmoothExpr:
        raise NotImplementedError


def _evaluate(e: SmoothExpr, xs: np.ndarray, memo: dict) -> np.ndarray:
    hit = memo.get(id(e))
    if hit is None:
        hit = e._eval(xs, memo)
        memo[id(e)] = hit
    return hit


def _taylor(e: SmoothExpr, x0: float, k: int, memo: dict) -> np.ndarray:
    hit = memo.get(id(e))
    if hit is None:
        hit = e._taylor(x0, k, memo)
        memo[id(e)] = hit
    return hit


# ---------------------------------------------------------------------------
# truncated power series helpers


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _series_recip(b: np.ndarray, where: SmoothExpr, x0: float) -> np.ndarray:
    if b[0] == 0:
        raise EvaluationError(f"pole: {where} vanishes at x={x0!r}", node=where, point=x0)
    out = np.zeros_like(b)
    out[0] = 1.0 / b[0]
    for n in range(1, len(b)):
        out[n] = -np.dot(b[1 : n + 1], out[n - 1 :: -1][:n]) / b[0]
    return out


def _series_pow(b: np.ndarray, p: int) -> np.ndarray:
    result = np.zeros_like(b)
    result[0] = 1.0
    base = b
    while p:
        if p & 1:
            result = _series_mul(result, base)
        p >>= 1
        if p:
            base = _series_mul(base, base)
    return result


def _series_exp(u: np.ndarray) -> np.ndarray:
    out = np.zeros_like(u)
    out[0] = cmath.exp(u[0])
    j = np.arange(len(u))
    for n in range(1, len(u)):
        out[n] = np.dot(j[1 : n + 1] * u[1 : n + 1], out[n - 1 :: -1][:n]) / n
    return out


def _series_sincos(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    s = np.zeros_like(u)
    c = np.zeros_like(u)
    s[0] = cmath.sin(u[0])
    c[0] = cmath.cos(u[0])
    j = np.arange(len(u))
    for n in range(1, len(u)):
        ju = j[1 : n + 1] * u[1 : n + 1]
        s[n] = np.dot(ju, c[n - 1 :: -1][:n]) / n
        c[n] = -np.dot(ju, s[n - 1 :: -1][:n]) / n
    return s, c


# ---------------------------------------------------------------------------
# node types


class Const(SmoothExpr):
    __slots__ = ("value",)
    kind = "const"

    def __init__(self, value: Number):
        super().__init__()
        self.value = complex(value)

    @property
    def is_const(self) -> bool:
        return True

    def is_zero(self) -> bool:
        return self.value == 0

    def _render(self) -> str:
        return format_number(self.value)

    def _derivative(self) -> SmoothExpr:
        return ZERO

    def _eval(self, xs, memo):
        return np.full(xs.shape, self.value, dtype=complex)

    def _taylor(self, x0, k, memo):
        out = np.zeros(k + 1, dtype=complex)
        out[0] = self.value
        return out

    def substitute(self, inner):
        return self


class Var(SmoothExpr):
    __slots__ = ()
    kind = "var"

    def _render(self) -> str:
        return "x"

    def _derivative(self) -> SmoothExpr:
        return ONE

    def _eval(self, xs, memo):
        return xs.astype(complex)

    def _taylor(self, x0, k, memo):
        out = np.zeros(k + 1, dtype=complex)
        out[0] = x0
        if k >= 1:
            out[1] = 1.0
        return out

    def substitute(self, inner):
        return inner


_FUNCS: dict[str, Callable] = {"exp": np.exp, "sin": np.sin, "cos": np.cos}


class Func(SmoothExpr):
    __slots__ = ("name", "arg")
    kind = "func"

    def __init__(self, name: str, arg: SmoothExpr):
        super().__init__()
        if name not in _FUNCS:
            raise ConstructionError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg

    def children(self):
        return (self.arg,)

    def _render(self) -> str:
        return f"{self.name}({self.arg.key})"

    def _derivative(self) -> SmoothExpr:
        du = self.arg.derivative()
        if self.name == "exp":
            outer = self
        elif self.name == "sin":
            outer = func("cos", self.arg)
        else:
            outer = mul(-1, func("sin", self.arg))
        return mul(outer, du)

    def _eval(self, xs, memo):
        return _FUNCS[self.name](_evaluate(self.arg, xs, memo))

    def _taylor(self, x0, k, memo):
        u = _taylor(self.arg, x0, k, memo)
        if self.name == "exp":
            return _series_exp(u)
        s, c = _series_sincos(u)
        return s if self.name == "sin" else c

    def substitute(self, inner):
        return func(self.name, self.arg.substitute(inner))


class Sum(SmoothExpr):
    """``const + sum(coef * mono)`` with distinct, non-constant monomials."""

    __slots__ = ("const", "terms")
    kind = "sum"

    def __init__(self, const_: complex, terms: tuple[tuple[complex, SmoothExpr], ...]):
        super().__init__()
        self.const = complex(const_)
        self.terms = terms

    def children(self):
        return tuple(m for _, m in self.terms)

    def _render(self) -> str:
        parts: list[str] = []
        if self.const != 0:
            parts.append(format_number(self.const))
        for coef, mono in self.terms:
            body = mono.key
            if coef == 1:
                text, neg = body, False
            elif coef == -1:
                text, neg = body, True
            elif coef.imag == 0:
                text, neg = f"{_format_real(abs(coef.real))}*{body}", coef.real < 0
            else:
                text, neg = f"{format_number(coef)}*{body}", False
            if not parts:
                parts.append("-" + text if neg else text)
            else:
                parts.append(("- " if neg else "+ ") + text)
        return " ".join(parts)

    def _derivative(self) -> SmoothExpr:
        return add(*(mul(c, m.derivative()) for c, m in self.terms))

    def _eval(self, xs, memo):
        out = np.full(xs.shape, self.const, dtype=complex)
        for coef, mono in self.terms:
            out = out + coef * _evaluate(mono, xs, memo)
        return out

    def _taylor(self, x0, k, memo):
        out = np.zeros(k + 1, dtype=complex)
        out[0] = self.const
        for coef, mono in self.terms:
            out = out + coef * _taylor(mono, x0, k, memo)
        return out

    def substitute(self, inner):
        return add(Const(self.const), *(mul(c, m.substitute(inner)) for c, m in self.terms))


class Prod(SmoothExpr):
    """Product of distinct bases raised to non-zero integer powers."""

    __slots__ = ("factors",)
    kind = "prod"

    def __init__(self, factors: tuple[tuple[SmoothExpr, int], ...]):
        super().__init__()
        self.factors = factors

    def children(self):
        return tuple(b for b, _ in self.factors)

    def _render(self) -> str:
        parts = []
        for base, p in self.factors:
            text = base.key
            if isinstance(base, Sum):
                text = f"({text})"
            if p != 1:
                text = f"{text}^{p}" if p > 0 else f"{text}^({p})"
            parts.append(text)
        return "*".join(parts)

    def _derivative(self) -> SmoothExpr:
        terms = []
        for idx, (base, p) in enumerate(self.factors):
            rest = [power(b, q) for j, (b, q) in enumerate(self.factors) if j != idx]
            terms.append(mul(p, power(base, p - 1), base.derivative(), *rest))
        return add(*terms)

    def _eval(self, xs, memo):
        out = np.ones(xs.shape, dtype=complex)
        for base, p in self.factors:
            val = _evaluate(base, xs, memo)
            if p < 0:
                bad = val == 0
                if np.any(bad):
                    x_bad = float(xs[np.argmax(bad)])
                    raise EvaluationError(
                        f"pole: {base} vanishes at x={x_bad!r}", node=base, point=x_bad
                    )
            out = out * val**p
        return out

    def _taylor(self, x0, k, memo):
        out = np.zeros(k + 1, dtype=complex)
        out[0] = 1.0
        for base, p in self.factors:
            b = _taylor(base, x0, k, memo)
            term = _series_pow(b, abs(p))
            if p < 0:
                term = _series_recip(term, base, x0)
            out = _series_mul(out, term)
        return out

    def substitute(self, inner):
        return mul(*(power(b.substitute(inner), p) for b, p in self.factors))


class Leaf(SmoothExpr):
    """An opaque smooth function supplied numerically.

    Subclasses implement :meth:`evaluate_leaf`, :meth:`taylor_leaf` and
    :meth:`derivative_expr`.  Leaves compare equal only to themselves.
    """

    __slots__ = ("label",)
    kind = "leaf"
    _counter = 0

    def __init__(self, label: str | None = None):
        super().__init__()
        Leaf._counter += 1
        self.label = label or "leaf"
        self.label = f"<{self.label}#{Leaf._counter}>"

    def has_leaf(self) -> bool:
        return True

    def _render(self) -> str:
        return self.label

    def _derivative(self) -> SmoothExpr:
        return self.derivative_expr()

    def _eval(self, xs, memo):
        return np.asarray(self.evaluate_leaf(xs), dtype=complex)

    def _taylor(self, x0, k, memo):
        return np.asarray(self.taylor_leaf(x0, k), dtype=complex)

    def substitute(self, inner):
        raise ConstructionError("cannot compose a numerical leaf with an expression")

    def evaluate_leaf(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def taylor_leaf(self, x0: float, k: int) -> np.ndarray:
        raise NotImplementedError

    def derivative_expr(self) -> SmoothExpr:
        raise NotImplementedError


X = Var()
ZERO = Const(0)
ONE = Const(1)
I = Const(1j)


def as_expr(value) -> SmoothExpr:
    if isinstance(value, SmoothExpr):
        return value
    if isinstance(value, (int, float, complex, np.number)):
        return Const(complex(value))
    raise TypeError(f"cannot convert {type(value).__name__} to SmoothExpr")


def const(value: Number) -> Const:
    return Const(value)


# ---------------------------------------------------------------------------
# smart constructors


def _split_coef(e: SmoothExpr) -> tuple[complex, SmoothExpr]:
    if isinstance(e, Sum) and e.const == 0 and len(e.terms) == 1:
        return e.terms[0]
    return 1.0 + 0j, e


def add(*exprs: SmoothExpr | Number) -> SmoothExpr:
    total = 0j
    acc: dict[str, list] = {}
    for raw in exprs:
        e = as_expr(raw)
        if isinstance(e, Const):
            total += e.value
            continue
        if isinstance(e, Sum):
            total += e.const
            items: Iterable = e.terms
        else:
            items = (_split_coef(e),)
        for coef, mono in items:
            slot = acc.get(mono.key)
            if slot is None:
                acc[mono.key] = [complex(coef), mono]
            else:
                slot[0] += coef
    terms = tuple((c, m) for k, (c, m) in sorted(acc.items()) if c != 0)
    if not terms:
        return Const(total)
    if total == 0 and len(terms) == 1 and terms[0][0] == 1:
        return terms[0][1]
    return Sum(total, terms)


def mul(*exprs: SmoothExpr | Number) -> SmoothExpr:
    coef = 1.0 + 0j
    acc: dict[str, list] = {}
    for raw in exprs:
        e = as_expr(raw)
        if isinstance(e, Const):
            coef *= e.value
            continue
        c, e = _split_coef(e)
        coef *= c
        items = e.factors if isinstance(e, Prod) else ((e, 1),)
        for base, p in items:
            slot = acc.get(base.key)
            if slot is None:
                acc[base.key] = [base, p]
            else:
                slot[1] += p
    if coef == 0:
        return ZERO
    factors = tuple((b, p) for k, (b, p) in sorted(acc.items()) if p != 0)
    if not factors:
        return Const(coef)
    if len(factors) == 1 and factors[0][1] == 1:
        mono = factors[0][0]
    else:
        mono = Prod(factors)
    if coef == 1:
        return mono
    return Sum(0j, ((coef, mono),))


def power(base: SmoothExpr | Number, p: int) -> SmoothExpr:
    if int(p) != p:
        raise ConstructionError(f"exponent must be an integer, got {p!r}")
    p = int(p)
    base = as_expr(base)
    if p == 0:
        return ONE
    if p == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and p < 0:
            raise ConstructionError("division by the zero expression")
        return Const(base.value**p)
    c, mono = _split_coef(base)
    if c != 1:
        return mul(Const(c**p), power(mono, p))
    if isinstance(mono, Prod):
        return mul(*(Prod(((b, q * p),)) if q * p != 1 else b for b, q in mono.factors))
    return Prod(((mono, p),))


def div(a: SmoothExpr | Number, b: SmoothExpr | Number) -> SmoothExpr:
    b = as_expr(b)
    if b.is_zero():
        raise ConstructionError("division by the zero expression")
    return mul(a, power(b, -1))


def func(name: str, arg: SmoothExpr | Number) -> SmoothExpr:
    arg = as_expr(arg)
    if isinstance(arg, Const):
        fn = {"exp": cmath.exp, "sin": cmath.sin, "cos": cmath.cos}[name]
        return Const(fn(arg.value))
    return Func(name, arg)


def exp(arg) -> SmoothExpr:
    return func("exp", arg)


def sin(arg) -> SmoothExpr:
    return func("sin", arg)


def cos(arg) -> SmoothExpr:
    return func("cos", arg)


def compose(outer: SmoothExpr | str, inner: SmoothExpr) -> SmoothExpr:
    """``outer(inner(x))``; ``outer`` may also be one of ``"exp"``, ``"sin"``, ``"cos"``."""
    if isinstance(outer, str):
        return func(outer, inner)
    return as_expr(outer).substitute(as_expr(inner))


def combine(op: str, e1, e2) -> SmoothExpr:
    """Pointwise combination of two expressions, dispatched on ``op``."""
    if op == "add":
        return add(e1, e2)
    if op == "sub":
        return add(e1, mul(-1, e2))
    if op == "mul":
        return mul(e1, e2)
    if op == "div":
        return div(e1, e2)
    if op == "compose":
        return compose(e1, e2)
    if op == "pow":
        if isinstance(e2, SmoothExpr):
            if not isinstance(e2, Const) or e2.value.imag != 0 or not e2.value.real.is_integer():
                raise ConstructionError("exponent must be an integer constant")
            e2 = int(e2.value.real)
        return power(e1, e2)
    raise ConstructionError(f"unknown operation {op!r}")


def diff(e: SmoothExpr, k: int = 1) -> SmoothExpr:
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    out = as_expr(e)
    for _ in range(k):
        out = out.derivative()
    return out


_FACTORIALS = [math.factorial(j) for j in range(171)]


def eval_jet(e: SmoothExpr, x0: float, k: int) -> np.ndarray:
    coeffs = as_expr(e).taylor(x0, k)
    fact = np.array(_FACTORIALS[: k + 1], dtype=float)
    return coeffs * fact


def jets_agree(a: Sequence[complex], b: Sequence[complex], tol: float) -> bool:
    a = np.asarray(a)
    b = np.asarray(b)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        return False
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return bool(np.all(np.abs(a - b) <= tol * scale))
