"""The star product and the operators built on it.

``star`` uses the closed formula on the union partition: pieces multiply
pointwise, a delta of the left factor at ``x_i`` multiplies the right
factor's piece to the *right* of ``x_i``, and a delta of the right factor
multiplies the left factor's piece to the *left* of ``x_i``.  Deltas never
multiply each other.  Products ``delta^(j)(x - x_i) * g`` with smooth ``g``
are expanded with the usual Leibniz formula.

The shifted-limit definition is cross-checked numerically by
``mollifier_apply``.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import quadrature
from .distcore import (
    PiecewiseDist,
    as_dist,
    canonicalize,
    common_refinement,
    derivative,
)
from .errors import ConstructionError
from .smoothfn import ONE, ZERO, SmoothExpr, X, add, diff, exp, mul, power

__all__ = [
    "PointSet",
    "delta_times_smooth",
    "star",
    "delta_shift",
    "gamma",
    "tilde_d",
    "tilde_d_binomial",
    "mollifier",
    "mollifier_apply",
    "BUMP_NORM",
]


class PointSet(tuple):
    """Finite sorted set of interface points."""

    def __new__(cls, points: Iterable[float] = ()):
        pts = [float(p) for p in points]
        if len(set(pts)) != len(pts):
            raise ConstructionError(f"duplicate points in {pts}")
        return super().__new__(cls, sorted(pts))


def delta_times_smooth(order: int, jet: np.ndarray) -> np.ndarray:
    """Coefficients of ``delta^(order) * g`` in the basis ``delta^(k)``, k = 0..order.

    ``jet`` holds ``g(x0), g'(x0), ..., g^(order)(x0)``.
    """
    n = order
    out = np.zeros(n + 1, dtype=complex)
    for k in range(n + 1):
        out[k] = (-1) ** (k + n) * math.comb(n, k) * jet[n - k]
    return out


def _expand_deltas(
    deltas: dict, point_index: int, x0: float, coeffs: dict[int, complex], g: SmoothExpr
) -> None:
    if g.is_zero() or not coeffs:
        return
    top = max(coeffs)
    jet = g.jet(x0, top)
    for j, c in coeffs.items():
        contrib = c * delta_times_smooth(j, jet)
        for k, v in enumerate(contrib):
            if v != 0:
                key = (point_index, k)
                deltas[key] = deltas.get(key, 0j) + v


def star(F, G) -> PiecewiseDist:
    """The associative, noncommutative product ``F * G``."""
    f, g = common_refinement(as_dist(F), as_dist(G))
    pieces = [mul(a, b) for a, b in zip(f.pieces, g.pieces)]
    deltas: dict = {}
    by_point_f: dict[int, dict[int, complex]] = {}
    by_point_g: dict[int, dict[int, complex]] = {}
    for (i, j), c in f.deltas.items():
        by_point_f.setdefault(i, {})[j] = c
    for (i, j), c in g.deltas.items():
        by_point_g.setdefault(i, {})[j] = c
    for i, x0 in enumerate(f.breakpoints):
        if i in by_point_f:
            _expand_deltas(deltas, i, x0, by_point_f[i], g.pieces[i + 1])
        if i in by_point_g:
            _expand_deltas(deltas, i, x0, by_point_g[i], f.pieces[i])
    return canonicalize(f.breakpoints, pieces, deltas)


def _check_side(side: str) -> None:
    if side not in ("-", "+"):
        raise ValueError(f"side must be '-' or '+', got {side!r}")


def delta_shift(side: str, n: int, x0: float, F) -> PiecewiseDist:
    """Right (``'+'``: ``delta^(n)(x-x0) * F``) or left (``'-'``: ``F * delta^(n)(x-x0)``) shifting delta."""
    _check_side(side)
    d = PiecewiseDist.delta(n, x0)
    return star(d, F) if side == "+" else star(F, d)


def gamma(n: int, x0: float, F) -> PiecewiseDist:
    """Left minus right shifting delta of order ``n`` at ``x0``."""
    return delta_shift("-", n, x0, F) - delta_shift("+", n, x0, F)


def tilde_d(F, points: Iterable[float] = (0.0,), k: int = 1) -> PiecewiseDist:
    """``k``-th power of the modified derivative ``D + sum_x0 Gamma(x0)``."""
    pts = PointSet(points)
    out = as_dist(F)
    for _ in range(k):
        step = derivative(out, 1)
        for x0 in pts:
            step = step + gamma(0, x0, out)
        out = step
    return out


def tilde_d_binomial(F, n: int, points: Iterable[float] = (0.0,)) -> PiecewiseDist:
    """``D^n F + sum_j C(n, j) Gamma^(j-1) D^(n-j) F`` summed over the interface points."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    pts = PointSet(points)
    F = as_dist(F)
    derivs = [F]
    for _ in range(n):
        derivs.append(derivative(derivs[-1], 1))
    out = derivs[n]
    for x0 in pts:
        for j in range(1, n + 1):
            out = out + math.comb(n, j) * gamma(j - 1, x0, derivs[n - j])
    return out


# ---------------------------------------------------------------------------
# mollifier harness


def _bump_integrand(t: np.ndarray) -> np.ndarray:
    return np.exp(-1.0 / (1.0 - t * t))


@lru_cache(maxsize=1)
def _bump_norm() -> float:
    value, _ = quadrature.integrate(_bump_integrand, -1.0, 1.0, tol=1e-13)
    return value.real


BUMP_NORM = _bump_norm()


def mollifier(eps: float, n: int = 0, shift: float = 0.0) -> SmoothExpr:
    """``v_eps^(n)(x - shift)`` on its open support; ``v_eps`` is the unit-mass even bump on ``[-eps, eps]``."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = mul(add(X, -shift), 1.0 / eps)
    body = exp(mul(-1, power(add(ONE, mul(-1, power(u, 2))), -1)))
    return diff(mul(1.0 / (eps * BUMP_NORM), body), n)


def mollifier_apply(side: str, n: int, eps: float, F) -> PiecewiseDist:
    """Dual product ``v_eps^(n)(x -+ eps) * F``: the regularised shifting delta."""
    _check_side(side)
    F = as_dist(F)
    shift = eps if side == "+" else -eps
    lo, hi = shift - eps, shift + eps
    v = mollifier(eps, n, shift)
    window = PiecewiseDist((lo, hi), (ZERO, v, ZERO))
    f, w = common_refinement(F, window)
    pieces = []
    for i, (fp, wp) in enumerate(zip(f.pieces, w.pieces)):
        pieces.append(mul(fp, wp))
    deltas: dict = {}
    by_point: dict[int, dict[int, complex]] = {}
    for (i, j), c in f.deltas.items():
        if lo < f.breakpoints[i] < hi:
            by_point.setdefault(i, {})[j] = c
    for i, coeffs in by_point.items():
        _expand_deltas(deltas, i, f.breakpoints[i], coeffs, v)
    return canonicalize(f.breakpoints, pieces, deltas)
