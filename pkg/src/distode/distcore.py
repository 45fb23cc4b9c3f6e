"""Piecewise smooth functions plus finitely many delta terms.

A :class:`PiecewiseDist` stores sorted breakpoints ``x_1 < ... < x_m``, one
smooth piece per open interval (``m + 1`` pieces, the outer two unbounded) and
a sparse map ``(breakpoint index, derivative order) -> coefficient`` for the
terms ``c * delta^(j)(x - x_i)``.

Unbounded intervals are only sampled inside a window ``[-W, W]``; pairing
against compactly supported test functions never needs more.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import quadrature
from .errors import ConstructionError, EvaluationError
from .smoothfn import (
    ONE,
    ZERO,
    Const,
    SmoothExpr,
    X,
    add,
    as_expr,
    exp,
    jets_agree,
    mul,
    power,
)

DEFAULT_WINDOW = 10.0
DELTA_ORDER_CAP = 32
MERGE_ORDER = 32
MERGE_RTOL = 1e-12

DeltaKey = tuple[int, int]


class PiecewiseDist:
    """An element of the algebra of piecewise smooth distributions."""

    __slots__ = ("breakpoints", "pieces", "deltas")

    def __init__(
        self,
        breakpoints: Sequence[float],
        pieces: Sequence[SmoothExpr],
        deltas: Mapping[DeltaKey, complex] | None = None,
    ):
        bps = tuple(float(b) for b in breakpoints)
        pcs = tuple(as_expr(p) for p in pieces)
        if len(pcs) != len(bps) + 1:
            raise ConstructionError(
                f"{len(bps)} breakpoints need {len(bps) + 1} pieces, got {len(pcs)}"
            )
        if any(not math.isfinite(b) for b in bps):
            raise ConstructionError("breakpoints must be finite")
        if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
            raise ConstructionError(f"breakpoints must be strictly increasing: {bps}")
        dl: dict[DeltaKey, complex] = {}
        for (i, j), c in (deltas or {}).items():
            if not 0 <= i < len(bps):
                raise ConstructionError(f"delta references breakpoint index {i} out of range")
            if j < 0:
                raise ConstructionError(f"negative delta order {j}")
            c = complex(c)
            if c != 0:
                dl[(int(i), int(j))] = dl.get((int(i), int(j)), 0j) + c
        self.breakpoints = bps
        self.pieces = pcs
        self.deltas = dl

    # -- constructors ---------------------------------------------------------
    @classmethod
    def smooth(cls, expr) -> PiecewiseDist:
        return cls((), (as_expr(expr),))

    @classmethod
    def zero(cls) -> PiecewiseDist:
        return cls((), (ZERO,))

    @classmethod
    def heaviside(cls, at: float = 0.0, expr=ONE) -> PiecewiseDist:
        """``H(x - at) * expr``."""
        return cls((at,), (ZERO, as_expr(expr)))

    @classmethod
    def heaviside_minus(cls, at: float = 0.0, expr=ONE) -> PiecewiseDist:
        """``H_-(x - at) * expr`` with ``H_- = 1 - H``."""
        return cls((at,), (as_expr(expr), ZERO))

    @classmethod
    def delta(cls, order: int = 0, at: float = 0.0, coef: complex = 1.0) -> PiecewiseDist:
        return cls((at,), (ZERO, ZERO), {(0, order): coef})

    @classmethod
    def indicator(cls, a: float, b: float, expr=ONE) -> PiecewiseDist:
        """``expr`` times the characteristic function of ``(a, b)``."""
        return cls((a, b), (ZERO, as_expr(expr), ZERO))

    @classmethod
    def two_sided(cls, left, right, at: float = 0.0) -> PiecewiseDist:
        """``H_-(x - at) * left + H(x - at) * right``."""
        return cls((at,), (as_expr(left), as_expr(right)))

    # -- queries --------------------------------------------------------------
    @property
    def max_delta_order(self) -> int:
        return max((j for _, j in self.deltas), default=-1)

    @property
    def delta_points(self) -> tuple[float, ...]:
        return tuple(sorted({self.breakpoints[i] for i, _ in self.deltas}))

    def has_deltas(self) -> bool:
        return bool(self.deltas)

    def is_smooth(self) -> bool:
        return not self.breakpoints

    def piece_part_is_zero(self) -> bool:
        return all(p.is_zero() for p in self.pieces)

    def interval(self, i: int) -> tuple[float, float]:
        lo = self.breakpoints[i - 1] if i > 0 else -math.inf
        hi = self.breakpoints[i] if i < len(self.breakpoints) else math.inf
        return lo, hi

    def piece_index(self, x0: float, side: str) -> int:
        """Index of the piece immediately to the given side (``'-'`` or ``'+'``) of ``x0``."""
        if side not in ("-", "+"):
            raise ValueError(f"side must be '-' or '+', got {side!r}")
        if side == "-":
            return bisect.bisect_left(self.breakpoints, x0)
        return bisect.bisect_right(self.breakpoints, x0)

    def deltas_at(self, x0: float) -> dict[int, complex]:
        out: dict[int, complex] = {}
        for (i, j), c in self.deltas.items():
            if self.breakpoints[i] == x0:
                out[j] = c
        return out

    def delta_part(self) -> PiecewiseDist:
        return PiecewiseDist(self.breakpoints, [ZERO] * len(self.pieces), self.deltas)

    def piece_part(self) -> PiecewiseDist:
        return PiecewiseDist(self.breakpoints, self.pieces)

    def __call__(self, x):
        """Evaluate the regular part away from breakpoints."""
        xs = np.asarray(x, dtype=float)
        flat = xs.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        idx = np.searchsorted(np.asarray(self.breakpoints), flat, side="right")
        for i in np.unique(idx):
            mask = idx == i
            out[mask] = self.pieces[i].evaluate(flat[mask])
        out = out.reshape(xs.shape)
        return complex(out) if xs.ndim == 0 else out

    # -- algebra --------------------------------------------------------------
    def __add__(self, other) -> PiecewiseDist:
        other = as_dist(other)
        f, g = common_refinement(self, other)
        deltas = dict(f.deltas)
        for k, c in g.deltas.items():
            deltas[k] = deltas.get(k, 0j) + c
        pieces = [add(a, b) for a, b in zip(f.pieces, g.pieces)]
        return canonicalize(f.breakpoints, pieces, deltas)

    __radd__ = __add__

    def __neg__(self) -> PiecewiseDist:
        return self.scale(-1)

    def __sub__(self, other) -> PiecewiseDist:
        return self + (-as_dist(other))

    def __rsub__(self, other) -> PiecewiseDist:
        return as_dist(other) + (-self)

    def scale(self, c: complex) -> PiecewiseDist:
        c = complex(c)
        return canonicalize(
            self.breakpoints,
            [mul(c, p) for p in self.pieces],
            {k: c * v for k, v in self.deltas.items()},
        )

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"PiecewiseDist({self.to_text()!r})"

    def to_text(self) -> str:
        from .dsl import print_dist

        return print_dist(self)

    # -- structure --------------------------------------------------------------
    def same_structure(self, other: PiecewiseDist) -> bool:
        return (
            self.breakpoints == other.breakpoints
            and self.deltas == other.deltas
            and all(a == b for a, b in zip(self.pieces, other.pieces))
        )

    # -- serialisation ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "pieces": [None if p.has_leaf() else p.key for p in self.pieces],
            "deltas": [
                {"point_index": i, "order": j, "re": c.real, "im": c.imag}
                for (i, j), c in sorted(self.deltas.items())
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> PiecewiseDist:
        from .dsl import parse_smooth

        try:
            bps = [float(b) for b in data["breakpoints"]]
            texts = data["pieces"]
            raw_deltas = data.get("deltas", [])
        except (KeyError, TypeError) as exc:
            raise ConstructionError(f"malformed distribution document: missing {exc}") from exc
        pieces = []
        for t in texts:
            if t is None:
                raise ConstructionError("piece is numerical-only and cannot be rebuilt from JSON")
            pieces.append(parse_smooth(str(t)))
        deltas: dict[DeltaKey, complex] = {}
        for d in raw_deltas:
            key = (int(d["point_index"]), int(d["order"]))
            deltas[key] = deltas.get(key, 0j) + complex(float(d.get("re", 0.0)), float(d.get("im", 0.0)))
        return canonicalize(bps, pieces, deltas)


def as_dist(value) -> PiecewiseDist:
    if isinstance(value, PiecewiseDist):
        return value
    return PiecewiseDist.smooth(as_expr(value))


# ---------------------------------------------------------------------------
# canonical form


def _sample_interval(lo: float, hi: float, count: int, window: float) -> np.ndarray:
    if math.isinf(lo) and math.isinf(hi):
        lo, hi = -window, window
    elif math.isinf(lo):
        lo = -window if hi > -window else hi - 1.0
    elif math.isinf(hi):
        hi = window if lo < window else lo + 1.0
    return np.linspace(lo, hi, count + 2)[1:-1]


def _removable(left: SmoothExpr, right: SmoothExpr, x0: float, order: int,
               samples: np.ndarray) -> bool:
    if left == right:
        return True
    try:
        with np.errstate(all="ignore"):
            if not jets_agree(left.taylor(x0, order), right.taylor(x0, order), MERGE_RTOL):
                return False
            return jets_agree(left.evaluate(samples), right.evaluate(samples), MERGE_RTOL)
    except (EvaluationError, FloatingPointError, OverflowError, ZeroDivisionError):
        return False


def canonicalize(
    breakpoints: Sequence[float],
    pieces: Sequence[SmoothExpr],
    deltas: Mapping[DeltaKey, complex] | None = None,
    *,
    cap: int = DELTA_ORDER_CAP,
    extra_order: int = 0,
    window: float = DEFAULT_WINDOW,
) -> PiecewiseDist:
    """Return the canonical form: sorted points, no zero deltas, no removable breakpoints.

    Breakpoints may be given in any order; ``pieces`` always list the intervals
    from left to right.  A breakpoint without delta terms whose neighbouring
    pieces share their jet up to ``max(32, highest delta order + extra_order)``
    and agree on samples of the right interval is merged away.
    """
    bps = [float(b) for b in breakpoints]
    if len(set(bps)) != len(bps):
        raise ConstructionError(f"duplicate breakpoints in {bps}")
    if len(pieces) != len(bps) + 1:
        raise ConstructionError(
            f"{len(bps)} breakpoints need {len(bps) + 1} pieces, got {len(pieces)}"
        )
    order = sorted(range(len(bps)), key=lambda i: bps[i])
    rank = {old: new for new, old in enumerate(order)}
    bps = [bps[i] for i in order]
    dl: dict[DeltaKey, complex] = {}
    for (i, j), c in (deltas or {}).items():
        if not 0 <= i < len(bps):
            raise ConstructionError(f"delta references breakpoint index {i} out of range")
        c = complex(c)
        key = (rank[i], int(j))
        dl[key] = dl.get(key, 0j) + c
    dl = {k: c for k, c in dl.items() if c != 0}
    top = max((j for _, j in dl), default=-1)
    if top > cap:
        raise ConstructionError(f"delta order {top} exceeds the cap {cap}")
    merge_order = max(MERGE_ORDER, top + extra_order)
    with_delta = {i for i, _ in dl}

    new_bps: list[float] = []
    new_pieces: list[SmoothExpr] = [as_expr(pieces[0])]
    index_map: dict[int, int] = {}
    for i, x0 in enumerate(bps):
        right = as_expr(pieces[i + 1])
        if i not in with_delta:
            hi = bps[i + 1] if i + 1 < len(bps) else math.inf
            samples = _sample_interval(x0, hi, 33, window)
            if _removable(new_pieces[-1], right, x0, merge_order, samples):
                continue
        index_map[i] = len(new_bps)
        new_bps.append(x0)
        new_pieces.append(right)
    new_deltas = {(index_map[i], j): c for (i, j), c in dl.items()}
    return PiecewiseDist(new_bps, new_pieces, new_deltas)


def refine(F: PiecewiseDist, points: Iterable[float]) -> PiecewiseDist:
    """Same distribution over a partition that contains ``points``.

    The result may carry removable breakpoints; it is not canonical.
    """
    extra = sorted({float(p) for p in points} - set(F.breakpoints))
    if not extra:
        return F
    bps = sorted(set(F.breakpoints) | set(extra))
    pieces = []
    for k in range(len(bps) + 1):
        probe = bps[k] if k < len(bps) else math.inf
        # interval k ends at bps[k]; locate it inside F's partition
        pieces.append(F.pieces[bisect.bisect_left(F.breakpoints, probe)])
    pos = {x: k for k, x in enumerate(bps)}
    deltas = {(pos[F.breakpoints[i]], j): c for (i, j), c in F.deltas.items()}
    return PiecewiseDist(bps, pieces, deltas)


def common_refinement(*dists: PiecewiseDist) -> list[PiecewiseDist]:
    pts: set[float] = set()
    for d in dists:
        pts.update(d.breakpoints)
    return [refine(d, pts) for d in dists]


# ---------------------------------------------------------------------------
# calculus


def _value_at(piece: SmoothExpr, x0: float) -> complex:
    return complex(piece.taylor(x0, 0)[0])


def derivative(F: PiecewiseDist, k: int = 1) -> PiecewiseDist:
    """``k``-th distributional derivative."""
    if k < 0:
        raise ValueError("derivative order must be non-negative")
    out = F
    for _ in range(k):
        pieces = [p.derivative() for p in out.pieces]
        deltas: dict[DeltaKey, complex] = {}
        for (i, j), c in out.deltas.items():
            deltas[(i, j + 1)] = c
        for i, x0 in enumerate(out.breakpoints):
            jump = _value_at(out.pieces[i + 1], x0) - _value_at(out.pieces[i], x0)
            if jump != 0:
                deltas[(i, 0)] = deltas.get((i, 0), 0j) + jump
        out = canonicalize(out.breakpoints, pieces, deltas)
    return out


def lateral_trace(F: PiecewiseDist, x0: float, side: str, count: int) -> np.ndarray:
    """``(f(x0), f'(x0), ..., f^(count-1)(x0))`` of the piece on ``side`` of ``x0``.

    Delta terms sitting at ``x0`` are ignored.
    """
    if count <= 0:
        return np.zeros(0, dtype=complex)
    piece = F.pieces[F.piece_index(float(x0), side)]
    return piece.jet(float(x0), count - 1)


# ---------------------------------------------------------------------------
# test functions and pairing


def bump(center: float = 0.0, radius: float = 1.0) -> SmoothExpr:
    """``exp(-1/(1 - ((x - center)/radius)^2))``, flat at ``center +- radius``."""
    u = mul(add(X, -center), 1.0 / radius)
    return exp(mul(-1, power(add(ONE, mul(-1, power(u, 2))), -1)))


@dataclass(frozen=True)
class TestFn:
    """A compactly supported smooth function: ``body`` on ``[a, b]``, zero outside.

    ``body`` and its first ``order`` derivatives must vanish (to 1e-14) at the
    edges of the support; this is spot-checked at 16 points inside each edge.
    """

    __test__ = False  # keep pytest from collecting this class

    body: SmoothExpr
    support: tuple[float, float]
    order: int = 2
    band: float = field(default=1e-3, repr=False)

    def __post_init__(self):
        a, b = (float(s) for s in self.support)
        if not a < b:
            raise ConstructionError(f"empty support {self.support}")
        object.__setattr__(self, "support", (a, b))
        object.__setattr__(self, "body", as_expr(self.body))
        width = (b - a) * self.band
        offsets = np.linspace(0.0, width, 17)[1:]
        for edge_pts in (a + offsets, b - offsets):
            expr = self.body
            for j in range(self.order + 1):
                vals = np.abs(expr.evaluate(edge_pts))
                if not np.all(vals <= 1e-14):
                    raise ConstructionError(
                        f"test function derivative {j} is not flat near the support edge "
                        f"(max {vals.max():.3e})"
                    )
                expr = expr.derivative()

    @classmethod
    def bump(cls, center: float = 0.0, radius: float = 1.0, order: int = 2) -> TestFn:
        return cls(bump(center, radius), (center - radius, center + radius), order)

    def __call__(self, x):
        xs = np.asarray(x, dtype=float)
        flat = xs.reshape(-1)
        out = np.zeros(flat.shape, dtype=complex)
        a, b = self.support
        inside = (flat > a) & (flat < b)
        if np.any(inside):
            out[inside] = self.body.evaluate(flat[inside])
        out = out.reshape(xs.shape)
        return complex(out) if xs.ndim == 0 else out

    def jet(self, x0: float, k: int) -> np.ndarray:
        a, b = self.support
        if not a < x0 < b:
            return np.zeros(k + 1, dtype=complex)
        return self.body.jet(x0, k)

    def derivative(self) -> TestFn:
        return TestFn(self.body.derivative(), self.support, max(self.order - 1, 0), self.band)

    def scale(self, c: complex) -> TestFn:
        return TestFn(mul(c, self.body), self.support, self.order, self.band)


def pair(F: PiecewiseDist, g: TestFn, tol: float = quadrature.DEFAULT_TOL) -> complex:
    """``<F, g>``: quadrature over the pieces plus the delta terms."""
    a, b = g.support
    spans = []
    for i, piece in enumerate(F.pieces):
        lo, hi = F.interval(i)
        lo, hi = max(lo, a), min(hi, b)
        if hi > lo and not piece.is_zero():
            spans.append((lo, hi, piece))
    total = 0j
    share = tol / max(len(spans), 1)
    for lo, hi, piece in spans:
        value, _ = quadrature.integrate(lambda xs, p=piece: p.evaluate(xs) * g(xs), lo, hi, share)
        total += value
    by_point: dict[int, int] = {}
    for (i, j) in F.deltas:
        by_point[i] = max(by_point.get(i, -1), j)
    for i, top in by_point.items():
        jet = g.jet(F.breakpoints[i], top)
        for j in range(top + 1):
            c = F.deltas.get((i, j))
            if c is not None:
                total += c * (-1) ** j * jet[j]
    return complex(total)


# ---------------------------------------------------------------------------
# comparison


@dataclass
class Comparison:
    """Outcome of :func:`approx_equal`; truthy iff the distributions agree."""

    equal: bool
    delta_max: float
    piece_max: float
    details: list[str]

    def __bool__(self) -> bool:
        return self.equal

    def __str__(self) -> str:
        head = "equal" if self.equal else "different"
        return "; ".join([head, *self.details])


def sample_points(F: PiecewiseDist, per_interval: int, window: float = DEFAULT_WINDOW):
    """Yield ``(piece index, sample xs)`` for each interval of ``F``."""
    for i in range(len(F.pieces)):
        lo, hi = F.interval(i)
        yield i, _sample_interval(lo, hi, per_interval, window)


def approx_equal(
    F: PiecewiseDist,
    G: PiecewiseDist,
    tol: float = 1e-10,
    window: float = DEFAULT_WINDOW,
    per_interval: int = 33,
) -> Comparison:
    """Compare on a common partition.

    Delta coefficients must agree to ``tol`` absolutely.  Pieces are sampled at
    ``per_interval`` interior points of every interval (unbounded ones clipped
    to ``[-window, window]``) and must agree to ``tol * max(1, |f|, |g|)``.
    """
    f, g = common_refinement(F, G)
    details: list[str] = []
    delta_max = 0.0
    for key in sorted(set(f.deltas) | set(g.deltas)):
        diff = abs(f.deltas.get(key, 0j) - g.deltas.get(key, 0j))
        delta_max = max(delta_max, diff)
        if diff > tol:
            details.append(
                f"delta ({key[0]},{key[1]}) at x={f.breakpoints[key[0]]!r} mismatch {diff:.6g}"
            )
    piece_max = 0.0
    for i, xs in sample_points(f, per_interval, window):
        a = f.pieces[i].evaluate(xs)
        b = g.pieces[i].evaluate(xs)
        scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        rel = np.abs(a - b) / scale
        worst = float(rel.max()) if rel.size else 0.0
        piece_max = max(piece_max, worst)
        if worst > tol:
            lo, hi = f.interval(i)
            x_bad = float(xs[int(np.argmax(rel))])
            details.append(
                f"piece on ({lo}, {hi}) mismatch {worst:.6g} at x={x_bad!r}"
            )
    return Comparison(not details, delta_max, piece_max, details)
