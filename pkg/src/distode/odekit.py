"""Linear ODEs with interface conditions, in distributional form.

Given ``sum_i a_i psi^(i) = f`` and interface conditions at points ``x_p``,
the distributional equation is

    sum_i a_i D~^i psi + sum_p F_p psi = f                          (tilde form)
    sum_i (a~_i * psi^(i) + psi^(i) * b~_i) + sum_p F_p psi = f     (star form)

Its global solutions solve the classical equation off the points, satisfy the
conditions at them, and carry no delta terms.  :func:`solve` builds such
solutions by integrating interval by interval and propagating jets across each
point; :func:`verify` checks any candidate by applying the operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .distcore import PiecewiseDist, approx_equal, as_dist, canonicalize, derivative
from .errors import ConstructionError, EvaluationError, NumericalError, ProblemError
from .interface import InterfaceSpec, f_hat_shift
from .smoothfn import (
    ZERO,
    Leaf,
    SmoothExpr,
    X,
    _format_real,
    add,
    as_expr,
    cos,
    div,
    exp,
    mul,
    power,
    sin,
)
from .staralg import PointSet, star, tilde_d

AN_SAMPLES = 257
AN_FLOOR = 1e-12
RTOL = 1e-10
ATOL = 1e-12
VERIFY_SAMPLES = 65
FORMS = ("tilde", "star")


# ---------------------------------------------------------------------------
# the classical equation


def _an_crossing(vals: np.ndarray, xs: np.ndarray) -> float | None:
    """First sample point (or interpolated root) where ``a_n`` gets within the floor of 0."""
    small = np.flatnonzero(np.abs(vals) <= AN_FLOOR)
    if small.size:
        return float(xs[small[0]])
    for k in range(len(xs) - 1):
        a, b = vals[k], vals[k + 1]
        seg = b - a
        if seg == 0:
            continue
        t = -(np.conj(seg) * a).real / abs(seg) ** 2
        if 0.0 < t < 1.0 and abs(a + t * seg) <= AN_FLOOR * max(1.0, abs(a), abs(b)):
            return float(xs[k] + t * (xs[k + 1] - xs[k]))
    return None


@dataclass(frozen=True, eq=False)
class OdeSpec:
    """``sum_{i<=n} a_i psi^(i) = f`` on a computational window."""

    coeffs: tuple[SmoothExpr, ...]
    rhs: SmoothExpr = ZERO
    window: tuple[float, float] = (-10.0, 10.0)

    def __post_init__(self):
        coeffs = tuple(as_expr(c) for c in self.coeffs)
        if len(coeffs) < 2:
            raise ConstructionError("an ODE needs order at least 1 (two or more coefficients)")
        lo, hi = (float(w) for w in self.window)
        if not lo < hi:
            raise ConstructionError(f"empty window [{lo}, {hi}]")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", as_expr(self.rhs))
        object.__setattr__(self, "window", (lo, hi))
        xs = np.linspace(lo, hi, AN_SAMPLES)
        try:
            with np.errstate(all="ignore"):
                vals = np.asarray(coeffs[-1].evaluate(xs), dtype=complex)
        except EvaluationError as exc:
            where = exc.point if exc.point is not None else lo
            raise ConstructionError(f"a_n vanishes near x={_format_real(round(where, 9) + 0.0)}") from exc
        bad = _an_crossing(vals, xs) if np.all(np.isfinite(vals)) else lo
        if bad is not None:
            raise ConstructionError(f"a_n vanishes near x={_format_real(round(bad, 9) + 0.0)}")

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def is_constant(self) -> bool:
        return all(c.is_const for c in self.coeffs) and self.rhs.is_const

    def homogeneous(self) -> OdeSpec:
        return OdeSpec(self.coeffs, ZERO, self.window)

    def residual_expr(self, psi: SmoothExpr) -> SmoothExpr:
        """``sum a_i psi^(i) - f`` for a smooth candidate."""
        terms = []
        d = as_expr(psi)
        for a in self.coeffs:
            terms.append(mul(a, d))
            d = d.derivative()
        return add(*terms, mul(-1, self.rhs))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "coeffs": [c.key for c in self.coeffs],
            "rhs": self.rhs.key,
        }


# ---------------------------------------------------------------------------
# numeric pieces


class NumericSolution:
    """Dense-output solution of the classical equation on the whole window.

    Values ``psi, ..., psi^(n-1)`` come from the integrator; higher derivatives
    and Taylor data are recovered from the equation itself.
    """

    def __init__(self, ode: OdeSpec, anchor: float, jet: Sequence[complex]):
        self.ode = ode
        self.anchor = float(anchor)
        self.jet0 = np.asarray(jet, dtype=complex)
        lo, hi = ode.window
        self.branches = []
        for end in (lo, hi):
            if end != self.anchor:
                sol = _integrate(ode, self.anchor, end, self.jet0, dense=True)
                self.branches.append((min(end, self.anchor), max(end, self.anchor), sol))
        self._leaves: dict[int, NumericLeaf] = {}
        self._series: dict[float, np.ndarray] = {}

    def values(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        n = self.ode.order
        out = np.empty((n, xs.size), dtype=complex)
        lo, hi = self.ode.window
        outside = (xs < lo) | (xs > hi)
        if np.any(outside):
            bad = float(xs[np.argmax(outside)])
            raise EvaluationError(
                f"numeric piece evaluated at x={bad!r}, outside its window [{lo}, {hi}]", point=bad
            )
        done = np.zeros(xs.size, dtype=bool)
        at_anchor = xs == self.anchor
        if np.any(at_anchor):
            out[:, at_anchor] = self.jet0[:, None]
            done |= at_anchor
        for a, b, sol in self.branches:
            mask = (~done) & (xs >= a) & (xs <= b)
            if np.any(mask):
                out[:, mask] = sol(xs[mask])
                done |= mask
        return out

    def leaf(self, d: int) -> NumericLeaf:
        if d not in self._leaves:
            self._leaves[d] = NumericLeaf(self, d)
        return self._leaves[d]

    def series(self, x0: float, k: int) -> np.ndarray:
        """Taylor coefficients of ``psi`` at ``x0`` up to order ``k``."""
        cached = self._series.get(x0)
        if cached is not None and len(cached) > k:
            return cached[: k + 1]
        n = self.ode.order
        top = max(k, n - 1)
        jet = self.values(np.array([x0]))[:, 0]
        p = np.zeros(top + 1, dtype=complex)
        for j in range(n):
            p[j] = jet[j] / math.factorial(j)
        if top >= n:
            m_max = top - n
            A = [c.taylor(x0, m_max) for c in self.ode.coeffs]
            F = self.ode.rhs.taylor(x0, m_max)
            for m in range(m_max + 1):
                acc = F[m]
                for i in range(n + 1):
                    for l in range(m + 1):
                        idx = m - l + i
                        if i == n and l == 0:
                            continue
                        acc -= A[i][l] * p[idx] * _falling(idx, i)
                p[m + n] = acc / (A[n][0] * _falling(m + n, n))
        self._series[x0] = p
        return p[: k + 1]


def _falling(top: int, count: int) -> float:
    out = 1.0
    for t in range(top - count + 1, top + 1):
        out *= t
    return out


class NumericLeaf(Leaf):
    """``psi^(d)`` of a :class:`NumericSolution`, ``d < n``."""

    __slots__ = ("solution", "order")

    def __init__(self, solution: NumericSolution, order: int):
        super().__init__(f"ode-solution d{order}")
        self.solution = solution
        self.order = order

    def evaluate_leaf(self, xs):
        return self.solution.values(xs)[self.order]

    def taylor_leaf(self, x0, k):
        d = self.order
        p = self.solution.series(x0, k + d)
        return np.array([p[j + d] * _falling(j + d, d) for j in range(k + 1)], dtype=complex)

    def derivative_expr(self):
        sol = self.solution
        n = sol.ode.order
        if self.order + 1 < n:
            return sol.leaf(self.order + 1)
        a = sol.ode.coeffs
        lower = [mul(a[i], sol.leaf(i)) for i in range(n)]
        return div(add(sol.ode.rhs, mul(-1, add(*lower))), a[n])


def _system(ode: OdeSpec):
    n = ode.order
    coeffs = ode.coeffs
    rhs = ode.rhs

    def fun(t, y):
        x = np.array([t])
        out = np.empty_like(y)
        out[:-1] = y[1:]
        acc = rhs.evaluate(x)[0]
        for i in range(n):
            acc -= coeffs[i].evaluate(x)[0] * y[i]
        out[-1] = acc / coeffs[n].evaluate(x)[0]
        return out

    return fun


def _integrate(ode: OdeSpec, x0: float, x1: float, jet, dense: bool = False):
    y0 = np.asarray(jet, dtype=complex)
    res = solve_ivp(
        _system(ode), (x0, x1), y0, method="RK45", rtol=RTOL, atol=ATOL, dense_output=dense
    )
    if not res.success:
        raise NumericalError(f"integration from {x0} to {x1} failed: {res.message}")
    return res.sol if dense else res.y[:, -1]


# ---------------------------------------------------------------------------
# exact pieces for constant coefficients


def _cluster_roots(roots: np.ndarray) -> list[tuple[complex, int]]:
    groups: list[list[complex]] = []
    for r in roots:
        for g in groups:
            if abs(r - g[0]) <= 1e-7 * max(1.0, abs(r)):
                g.append(r)
                break
        else:
            groups.append([r])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def characteristic_basis(coeffs: Sequence[complex]) -> list[SmoothExpr]:
    """Fundamental system of ``sum a_i psi^(i) = 0`` for constant ``a_i``.

    Real coefficients give the real basis ``x^k e^(ax) cos(bx)``, ``x^k e^(ax) sin(bx)``.
    """
    c = np.asarray(coeffs, dtype=complex)
    real = bool(np.all(c.imag == 0))
    poly = c[::-1].real if real else c[::-1]
    roots = np.roots(poly)
    basis: list[SmoothExpr] = []
    for r, mult in _cluster_roots(roots):
        scale = max(1.0, abs(r))
        if real and abs(r.imag) <= 1e-12 * scale:
            r = complex(r.real, 0.0)
        if real and r.imag < 0:
            continue
        for k in range(mult):
            xk = power(X, k)
            if real and r.imag > 0:
                growth = exp(mul(r.real, X))
                basis.append(mul(xk, growth, cos(mul(r.imag, X))))
                basis.append(mul(xk, growth, sin(mul(r.imag, X))))
            else:
                value = r.real if real else r
                basis.append(mul(xk, exp(mul(value, X))))
    if len(basis) != len(c) - 1:
        raise NumericalError("could not separate the characteristic roots")
    return basis


class _ExactPieces:
    def __init__(self, ode: OdeSpec):
        n = ode.order
        vals = [complex(cf.taylor(0.0, 0)[0]) for cf in ode.coeffs]
        self.n = n
        self.basis = characteristic_basis(vals)
        f = complex(ode.rhs.taylor(0.0, 0)[0])
        self.particular = ZERO if f == 0 else as_expr(f / vals[0])

    def piece(self, x0: float, jet, homogeneous: bool = False) -> SmoothExpr:
        part = ZERO if homogeneous else self.particular
        target = np.asarray(jet, dtype=complex) - part.jet(x0, self.n - 1)
        W = np.column_stack([b.jet(x0, self.n - 1) for b in self.basis])
        c = np.linalg.solve(W, target)
        return add(part, *(mul(ck, b) for ck, b in zip(c, self.basis) if ck != 0))

    def transport(self, x0: float, x1: float, jet, homogeneous: bool = False) -> np.ndarray:
        return self.piece(x0, jet, homogeneous).jet(x1, self.n - 1)


class _NumericPieces:
    def __init__(self, ode: OdeSpec):
        self.ode = ode
        self.hom = ode.homogeneous()
        self.n = ode.order

    def piece(self, x0: float, jet, homogeneous: bool = False) -> SmoothExpr:
        ode = self.hom if homogeneous else self.ode
        if not np.any(jet) and (homogeneous or ode.rhs.is_zero()):
            return ZERO
        return NumericSolution(ode, x0, jet).leaf(0)

    def transport(self, x0: float, x1: float, jet, homogeneous: bool = False) -> np.ndarray:
        if x0 == x1:
            return np.asarray(jet, dtype=complex)
        return _integrate(self.hom if homogeneous else self.ode, x0, x1, jet)


def _pieces_for(ode: OdeSpec, method: str):
    if method not in ("auto", "exact", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    exact_ok = ode.is_constant() and (
        ode.rhs.is_zero() or complex(ode.coeffs[0].taylor(0.0, 0)[0]) != 0
    )
    if method == "exact" and not exact_ok:
        raise ConstructionError("the exact path needs constant coefficients and a constant rhs with a_0 != 0")
    if method == "exact" or (method == "auto" and exact_ok):
        return _ExactPieces(ode)
    return _NumericPieces(ode)


# ---------------------------------------------------------------------------
# the distributional operator


def singular_coeffs(ode: OdeSpec, points: Iterable[float] = (0.0,)):
    """Coefficients ``(a~_0..a~_n, b~_0..b~_n)`` of the star form.

    ``a~_i = a_i/2 - sum_x0 sum_{k=1}^{n-i} C(i+k, k) a_{i+k} delta^(k-1)(x - x0)``
    and ``b~_i`` with a plus sign; the products with ``a_{i+k}`` are the
    ordinary ones, expanded at ``x0``.
    """
    n = ode.order
    pts = PointSet(points)
    a_t: list[PiecewiseDist] = []
    b_t: list[PiecewiseDist] = []
    for i in range(n + 1):
        half = PiecewiseDist.smooth(mul(0.5, ode.coeffs[i]))
        sing = PiecewiseDist.zero()
        for x0 in pts:
            for k in range(1, n - i + 1):
                a = ode.coeffs[i + k]
                if a.is_zero():
                    continue
                term = star(a, PiecewiseDist.delta(k - 1, x0))
                sing = sing + term.scale(math.comb(i + k, k))
        a_t.append(half - sing)
        b_t.append(half + sing)
    return a_t, b_t


@dataclass(frozen=True, eq=False)
class Ode2Operator:
    form: str
    ode: OdeSpec
    interfaces: tuple[InterfaceSpec, ...]
    a_tilde: tuple[PiecewiseDist, ...] | None = None
    b_tilde: tuple[PiecewiseDist, ...] | None = None

    @property
    def points(self) -> PointSet:
        return PointSet(s.point for s in self.interfaces)

    def __call__(self, psi) -> PiecewiseDist:
        return apply_ode2(self, psi)


def build_ode2(ode: OdeSpec, interfaces: Sequence[InterfaceSpec], form: str = "tilde") -> Ode2Operator:
    if form not in FORMS:
        raise ConstructionError(f"form must be one of {FORMS}, got {form!r}")
    specs = tuple(interfaces)
    pts = [s.point for s in specs]
    if len(set(pts)) != len(pts):
        raise ConstructionError(f"interface points must be distinct, got {pts}")
    for s in specs:
        if s.n != ode.order:
            raise ConstructionError(
                f"interface at x={s.point!r} acts on jets of length {s.n}, the ODE has order {ode.order}"
            )
    specs = tuple(sorted(specs, key=lambda s: s.point))
    if form == "star":
        a_t, b_t = singular_coeffs(ode, pts)
        return Ode2Operator(form, ode, specs, tuple(a_t), tuple(b_t))
    return Ode2Operator(form, ode, specs)


def apply_ode2(op: Ode2Operator, psi) -> PiecewiseDist:
    """The residual ``L psi - f`` in the operator's own formulation."""
    psi = as_dist(psi)
    n = op.ode.order
    out = PiecewiseDist.zero()
    if op.form == "tilde":
        cur = psi
        for i, a in enumerate(op.ode.coeffs):
            if not a.is_zero():
                out = out + star(a, cur)
            if i < n:
                cur = tilde_d(cur, op.points, 1)
    else:
        cur = psi
        for i in range(n + 1):
            out = out + star(op.a_tilde[i], cur) + star(cur, op.b_tilde[i])
            if i < n:
                cur = derivative(cur, 1)
    for spec in op.interfaces:
        out = out + f_hat_shift(spec, psi)
    return out - PiecewiseDist.smooth(op.ode.rhs)


# ---------------------------------------------------------------------------
# verification


@dataclass
class Verification:
    passed: bool
    piece_max: float
    delta_max: float
    details: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "piece_max": self.piece_max,
            "delta_max": self.delta_max,
            "details": list(self.details),
        }


def _window_samples(lo: float, hi: float, window: tuple[float, float], count: int) -> np.ndarray:
    lo, hi = max(lo, window[0]), min(hi, window[1])
    if not lo < hi:
        return np.zeros(0)
    return np.linspace(lo, hi, count + 2)[1:-1]


def verify(op: Ode2Operator, psi, tol: float = 1e-9, window: tuple[float, float] | None = None) -> Verification:
    """Apply the operator and measure what is left.

    Pieces are sampled at 65 interior points of every interval clipped to the
    window; every delta coefficient counts.
    """
    window = op.ode.window if window is None else (float(window[0]), float(window[1]))
    res = apply_ode2(op, psi)
    details = []
    piece_max = 0.0
    for i, piece in enumerate(res.pieces):
        lo, hi = res.interval(i)
        xs = _window_samples(lo, hi, window, VERIFY_SAMPLES)
        if xs.size == 0 or piece.is_zero():
            continue
        vals = np.abs(piece.evaluate(xs))
        worst = float(vals.max())
        piece_max = max(piece_max, worst)
        if not worst <= tol:
            details.append(f"piece residual {worst:.3e} at x={float(xs[np.argmax(vals)])!r}")
    delta_max = 0.0
    for (i, j), c in sorted(res.deltas.items()):
        delta_max = max(delta_max, abs(c))
        if not abs(c) <= tol:
            details.append(f"delta^{j} at x={res.breakpoints[i]!r} has coefficient {abs(c):.3e}")
    return Verification(not details, piece_max, delta_max, details)


def form_equivalence(
    ode: OdeSpec,
    interfaces: Sequence[InterfaceSpec],
    psi,
    tol: float = 1e-9,
    window: float | None = None,
):
    """Compare the tilde-form and star-form residuals of ``psi``."""
    tilde = apply_ode2(build_ode2(ode, interfaces, "tilde"), psi)
    starred = apply_ode2(build_ode2(ode, interfaces, "star"), psi)
    if window is None:
        window = max(abs(ode.window[0]), abs(ode.window[1]))
    return approx_equal(tilde, starred, tol, window=window)


# ---------------------------------------------------------------------------
# solving


@dataclass(frozen=True)
class InterfaceRecord:
    point: float
    status: str  # unique, family, inconsistent or unreached
    fiber_dim: int

    def to_dict(self) -> dict:
        return {"point": self.point, "status": self.status, "fiber_dim": self.fiber_dim}


@dataclass
class SolutionReport:
    """Global solutions found by :func:`solve`.

    ``solutions[0]`` is the particular solution through the initial jet; each
    further entry adds one direction of the affine family.  ``dimension`` is
    the dimension of the full solution space on the window, initial data free.
    """

    solutions: list[PiecewiseDist]
    dimension: int
    interfaces: list[InterfaceRecord]
    residual: Verification | None
    window: tuple[float, float]
    family_dim: int = 0

    @property
    def consistent(self) -> bool:
        return all(r.status in ("unique", "family") for r in self.interfaces)

    @property
    def particular(self) -> PiecewiseDist | None:
        return self.solutions[0] if self.solutions else None

    def to_dict(self) -> dict:
        res = self.residual
        return {
            "solutions": [_solution_dict(s) for s in self.solutions],
            "dimension": self.dimension,
            "interfaces": [r.to_dict() for r in self.interfaces],
            "residual": {
                "piece_max": res.piece_max if res else None,
                "delta_max": res.delta_max if res else None,
            },
        }

    def samples(self, per_interval: int = 201, which: int = 0) -> np.ndarray:
        """``(x, psi(x))`` rows; interface points appear once per side."""
        psi = self.solutions[which]
        rows = []
        for i, piece in enumerate(psi.pieces):
            lo, hi = psi.interval(i)
            lo, hi = max(lo, self.window[0]), min(hi, self.window[1])
            if not lo < hi:
                continue
            xs = np.linspace(lo, hi, per_interval)
            vals = piece.evaluate(xs)
            rows.extend(zip(xs, vals))
        return np.array(rows, dtype=complex) if rows else np.zeros((0, 2), dtype=complex)


def _solution_dict(psi: PiecewiseDist) -> dict:
    doc = psi.to_dict()
    if all(p is not None for p in doc["pieces"]):
        doc["text"] = psi.to_text()
    return doc


def _svd_split(mat: np.ndarray, rtol: float = 1e-10):
    """Rank, pseudo-inverse, left null space basis and right null space basis."""
    rows, cols = mat.shape
    if mat.size == 0:
        return 0, np.zeros((cols, rows), dtype=complex), np.eye(rows, dtype=complex), np.eye(cols, dtype=complex)
    U, s, Vh = np.linalg.svd(mat)
    r = int(np.sum(s > rtol * s[0])) if s.size and s[0] > 0 else 0
    V = Vh.conj().T
    pinv = V[:, :r] @ np.diag(1.0 / s[:r]) @ U[:, :r].conj().T
    return r, pinv, U[:, r:], V[:, r:]


def _cross(lhs: np.ndarray, rhs: np.ndarray, P: np.ndarray, M: np.ndarray):
    """Solve ``lhs t = rhs (P + M theta)`` for ``t`` over all admissible ``theta``.

    Returns ``(ok, theta0, K, p_new, N_new, fiber)``: admissible parameters are
    ``theta0 + K sigma`` and then ``t = p_new + N_new (sigma, nu)``.
    """
    n = lhs.shape[1]
    d = M.shape[1]
    r, pinv, left_null, right_null = _svd_split(lhs)
    C = left_null.conj().T @ rhs @ M
    e = left_null.conj().T @ rhs @ P
    scale = max(1.0, np.abs(rhs).max(initial=0.0) * (np.abs(P).max(initial=0.0) + np.abs(M).max(initial=0.0)))
    if C.size:
        theta0 = np.linalg.lstsq(C, -e, rcond=None)[0]
        _, _, _, K = _svd_split(C)
    else:
        theta0 = np.zeros(d, dtype=complex)
        K = np.eye(d, dtype=complex)
    resid = np.abs(C @ theta0 + e).max(initial=0.0) if e.size else 0.0
    if resid > 1e-8 * scale:
        return False, theta0, K, None, None, n - r
    p_new = pinv @ rhs @ (P + M @ theta0)
    N_new = np.hstack([pinv @ rhs @ M @ K, right_null])
    return True, theta0, K, p_new, N_new, n - r


class _Propagation:
    def __init__(self, n: int, count: int):
        self.n = n
        self.p: dict[int, np.ndarray] = {}
        self.N: dict[int, np.ndarray] = {}
        self.params = 0

    def reparametrize(self, theta0: np.ndarray, K: np.ndarray, extra: int) -> None:
        for k in self.p:
            self.p[k] = self.p[k] + self.N[k] @ theta0
            self.N[k] = np.hstack([self.N[k] @ K, np.zeros((self.n, extra), dtype=complex)])
        self.params = K.shape[1] + extra


def _propagate(pieces, points, entries, start, p0, N0, specs, homogeneous):
    """Carry the affine jet family from the start interval across every point."""
    n = len(p0)
    state = _Propagation(n, len(points) + 1)
    state.p[start] = np.asarray(p0, dtype=complex)
    state.N[start] = np.asarray(N0, dtype=complex).reshape(n, -1)
    state.params = state.N[start].shape[1]
    records: dict[int, InterfaceRecord] = {}

    def flow(k, exit_x):
        entry = entries[k]
        cols = [pieces.transport(entry, exit_x, np.eye(n)[:, j], homogeneous=True) for j in range(n)]
        Phi = np.column_stack(cols) if cols else np.zeros((n, 0))
        q = np.zeros(n, dtype=complex) if homogeneous else pieces.transport(
            entry, exit_x, np.zeros(n, dtype=complex)
        )
        return Phi, q

    for direction in (+1, -1):
        k = start
        while True:
            idx = k if direction > 0 else k - 1
            if not 0 <= idx < len(points):
                break
            x_if = points[idx]
            spec = specs[idx]
            Phi, q = flow(k, x_if)
            P = q + Phi @ state.p[k]
            M = Phi @ state.N[k]
            lhs, rhs = (spec.B, spec.A) if direction > 0 else (spec.A, spec.B)
            ok, theta0, K, p_new, N_new, fiber = _cross(lhs, rhs, P, M)
            if not ok:
                records[idx] = InterfaceRecord(x_if, "inconsistent", fiber)
                break
            state.reparametrize(theta0, K, fiber)
            nxt = k + direction
            state.p[nxt] = p_new
            state.N[nxt] = N_new
            records[idx] = InterfaceRecord(x_if, "family" if fiber else "unique", fiber)
            k = nxt
    out_records = [
        records.get(i, InterfaceRecord(x, "unreached", 0)) for i, x in enumerate(points)
    ]
    return state, out_records


def solve(
    ode: OdeSpec,
    interfaces: Sequence[InterfaceSpec],
    init: tuple[float, Sequence[complex]],
    window: tuple[float, float] | None = None,
    method: str = "auto",
    tol: float = 1e-7,
) -> SolutionReport:
    """Global solutions through the initial jet ``init = (x, (psi, psi', ...))``.

    Constant-coefficient equations with a constant right-hand side are solved
    exactly through the characteristic roots; anything else is integrated
    numerically (RK45, relative tolerance 1e-10).
    """
    if window is not None:
        ode = OdeSpec(ode.coeffs, ode.rhs, (float(window[0]), float(window[1])))
    lo, hi = ode.window
    n = ode.order
    op = build_ode2(ode, interfaces, "tilde")
    specs = list(op.interfaces)
    points = [s.point for s in specs]
    x_init = float(init[0])
    jet = np.asarray(init[1], dtype=complex)
    if jet.shape != (n,):
        raise ConstructionError(f"initial jet must have length {n}, got {jet.size}")
    if not lo <= x_init <= hi:
        raise ConstructionError(f"initial point {x_init!r} lies outside the window [{lo}, {hi}]")
    if x_init in points:
        raise ConstructionError(f"initial point {x_init!r} is an interface point")
    for x in points:
        if not lo < x < hi:
            raise ConstructionError(f"interface point {x!r} lies outside the window [{lo}, {hi}]")
    start = int(np.searchsorted(points, x_init))
    entries = {start: x_init}
    for k in range(start + 1, len(points) + 1):
        entries[k] = points[k - 1]
    for k in range(start):
        entries[k] = points[k]

    pieces = _pieces_for(ode, method)

    full, _ = _propagate(pieces, points, entries, start, np.zeros(n), np.eye(n), specs, True)
    dimension = full.params

    state, records = _propagate(pieces, points, entries, start, jet, np.zeros((n, 0)), specs, False)
    if not all(r.status in ("unique", "family") for r in records):
        return SolutionReport([], dimension, records, None, (lo, hi), 0)

    def build(offset_col: int | None) -> PiecewiseDist:
        out = []
        for k in range(len(points) + 1):
            j = state.p[k]
            if offset_col is not None:
                j = j + state.N[k][:, offset_col]
            out.append(pieces.piece(entries[k], j))
        return canonicalize(points, out, {}, window=max(abs(lo), abs(hi)))

    solutions = [build(None)] + [build(c) for c in range(state.params)]
    checks = [verify(op, psi, tol) for psi in solutions]
    overall = Verification(
        all(c.passed for c in checks),
        max(c.piece_max for c in checks),
        max(c.delta_max for c in checks),
        [d for c in checks for d in c.details],
    )
    return SolutionReport(solutions, dimension, records, overall, (lo, hi), state.params)


# ---------------------------------------------------------------------------
# problem documents


def _complex(value, where: str) -> complex:
    if isinstance(value, Mapping):
        try:
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"field {where!r} is not a complex number", where) from exc
    if isinstance(value, str):
        from .dsl import parse_smooth

        expr = parse_smooth(value)
        if not expr.is_const:
            raise ProblemError(f"field {where!r} must be a constant", where)
        return complex(expr.taylor(0.0, 0)[0])
    try:
        return complex(value)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"field {where!r} is not a complex number", where) from exc


@dataclass(frozen=True, eq=False)
class Problem:
    ode: OdeSpec
    interfaces: tuple[InterfaceSpec, ...]
    window: tuple[float, float]
    init: tuple[float, tuple[complex, ...]] | None

    @classmethod
    def from_dict(cls, data: Mapping) -> Problem:
        from .dsl import parse_smooth

        def need(obj, key, where):
            if not isinstance(obj, Mapping) or key not in obj:
                raise ProblemError(f"missing field {where!r}", where)
            return obj[key]

        ode_doc = need(data, "ode", "ode")
        coeff_texts = need(ode_doc, "coeffs", "ode.coeffs")
        if not isinstance(coeff_texts, list) or len(coeff_texts) < 2:
            raise ProblemError("field 'ode.coeffs' must list at least two coefficients", "ode.coeffs")
        order = ode_doc.get("order", len(coeff_texts) - 1)
        if not isinstance(order, int) or order != len(coeff_texts) - 1:
            raise ProblemError(
                f"field 'ode.order' is {order!r} but {len(coeff_texts)} coefficients were given",
                "ode.order",
            )
        coeffs = [parse_smooth(str(t)) for t in coeff_texts]
        rhs = parse_smooth(str(ode_doc.get("rhs", "0")))
        win = data.get("window", [-10.0, 10.0])
        try:
            window = (float(win[0]), float(win[1]))
        except (TypeError, ValueError, IndexError) as exc:
            raise ProblemError("field 'window' must be a pair of numbers", "window") from exc
        if len(win) != 2:
            raise ProblemError("field 'window' must be a pair of numbers", "window")
        ode = OdeSpec(tuple(coeffs), rhs, window)
        iface_docs = data.get("interfaces", [])
        if not isinstance(iface_docs, list):
            raise ProblemError("field 'interfaces' must be a list", "interfaces")
        specs = []
        for k, doc in enumerate(iface_docs):
            if not isinstance(doc, Mapping):
                raise ProblemError(f"field 'interfaces[{k}]' must be an object", f"interfaces[{k}]")
            spec = InterfaceSpec.from_dict(doc)
            if spec.n != order:
                raise ProblemError(
                    f"field 'interfaces[{k}]' has {spec.n} columns, expected {order}",
                    f"interfaces[{k}]",
                )
            specs.append(spec)
        init = None
        if "init" in data:
            init_doc = data["init"]
            x = need(init_doc, "x", "init.x")
            jet = need(init_doc, "jet", "init.jet")
            if not isinstance(jet, list) or len(jet) != order:
                raise ProblemError(f"field 'init.jet' must list {order} values", "init.jet")
            try:
                x = float(x)
            except (TypeError, ValueError) as exc:
                raise ProblemError("field 'init.x' must be a number", "init.x") from exc
            init = (x, tuple(_complex(v, f"init.jet[{i}]") for i, v in enumerate(jet)))
        return cls(ode, tuple(specs), window, init)

    def to_dict(self) -> dict:
        doc = {
            "ode": self.ode.to_dict(),
            "interfaces": [s.to_dict() for s in self.interfaces],
            "window": list(self.window),
        }
        if self.init is not None:
            doc["init"] = {
                "x": self.init[0],
                "jet": [{"re": z.real, "im": z.imag} for z in self.init[1]],
            }
        return doc
