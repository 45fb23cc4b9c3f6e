"""Seeded random instances for property checks.

Family, fixed so failures replay from a seed:

* smooth pieces: a polynomial of degree <= 3 with integer coefficients in
  [-3, 3], times (with probability 1/2) one of sin(a x), cos(a x), exp(a x)
  with a drawn from {-1, -1/2, 1/2, 1};
* distributions: at most two singular points drawn from {-1, 0, 1}, one random
  piece per interval, and at each point up to two delta terms of order <= 3
  with integer coefficients in [-2, 2];
* interface specs: n given, m uniform in 1..n, entries integers in [-2, 2]
  (complex with probability 1/4);
* interface candidates: two-sided polynomials, half of them forced into the
  kernel of the interface conditions.
"""

from __future__ import annotations

import numpy as np

from .distcore import PiecewiseDist, canonicalize
from .interface import InterfaceSpec
from .odekit import OdeSpec
from .smoothfn import SmoothExpr, X, add, cos, exp, mul, power, sin

POINTS = (-1.0, 0.0, 1.0)
RATES = (-1.0, -0.5, 0.5, 1.0)


def rng_for(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def polynomial(coeffs, center: float = 0.0) -> SmoothExpr:
    """``sum c_k (x - center)^k``."""
    u = add(X, -center)
    return add(*(mul(complex(c), power(u, k)) for k, c in enumerate(coeffs) if c != 0))


def random_smooth(rng: np.random.Generator, degree: int = 3) -> SmoothExpr:
    coeffs = rng.integers(-3, 4, size=rng.integers(1, degree + 2))
    if not np.any(coeffs):
        coeffs[0] = 1
    poly = polynomial(coeffs)
    kind = rng.integers(0, 6)
    if kind >= 3:
        return poly
    a = float(rng.choice(RATES))
    atom = (sin, cos, exp)[kind](mul(a, X))
    return mul(poly, atom)


def random_dist(
    rng: np.random.Generator,
    max_points: int = 2,
    max_order: int = 3,
    points=POINTS,
    deltas: bool = True,
) -> PiecewiseDist:
    count = int(rng.integers(0, min(max_points, len(points)) + 1))
    pts = sorted(float(p) for p in rng.choice(points, size=count, replace=False))
    pieces = [random_smooth(rng) for _ in range(count + 1)]
    dl = {}
    if deltas:
        for i in range(count):
            for _ in range(int(rng.integers(0, 3))):
                j = int(rng.integers(0, max_order + 1))
                c = int(rng.integers(-2, 3))
                if c:
                    dl[(i, j)] = dl.get((i, j), 0) + c
    return canonicalize(pts, pieces, dl)


def random_matrix(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    mat = rng.integers(-2, 3, size=(m, n)).astype(complex)
    if rng.random() < 0.25:
        mat = mat + 1j * rng.integers(-2, 3, size=(m, n))
    return mat


def random_spec(rng: np.random.Generator, n: int, point: float = 0.0) -> InterfaceSpec:
    m = int(rng.integers(1, n + 1))
    return InterfaceSpec(point, random_matrix(rng, m, n), random_matrix(rng, m, n))


def _jet_polynomial(jet, center: float, extra: np.ndarray) -> SmoothExpr:
    """Polynomial with the given jet at ``center``, plus higher-order noise."""
    from math import factorial

    coeffs = [complex(c) / factorial(k) for k, c in enumerate(jet)]
    coeffs += [complex(c) for c in extra]
    return polynomial(coeffs, center)


def random_two_sided(
    rng: np.random.Generator, spec: InterfaceSpec, in_kernel: bool | None = None
) -> PiecewiseDist:
    """``H_-(x - x0) psi_- + H(x - x0) psi_+`` with polynomial sides.

    With ``in_kernel`` true the plus jet is chosen so that the conditions hold
    whenever ``A psi_-(x0)`` lies in the range of ``B``.
    """
    n, x0 = spec.n, spec.point
    if in_kernel is None:
        in_kernel = bool(rng.random() < 0.5)
    minus_jet = rng.integers(-3, 4, size=n).astype(complex)
    minus = _jet_polynomial(minus_jet, x0, rng.integers(-2, 3, size=2))
    if in_kernel:
        target = spec.A @ minus_jet
        plus_jet, *_ = np.linalg.lstsq(spec.B, target, rcond=None)
        if np.abs(spec.B @ plus_jet - target).max(initial=0.0) > 1e-9:
            # A psi_- not reachable: the minus side must vanish to order n
            minus_jet = np.zeros(n, dtype=complex)
            minus = _jet_polynomial(minus_jet, x0, rng.integers(-2, 3, size=2))
            plus_jet = np.zeros(n, dtype=complex)
    else:
        plus_jet = rng.integers(-3, 4, size=n).astype(complex)
    plus = _jet_polynomial(plus_jet, x0, rng.integers(-2, 3, size=2))
    return canonicalize([x0], [minus, plus], {})


def random_ode(rng: np.random.Generator, n: int, window=(-10.0, 10.0)) -> OdeSpec:
    """Order-``n`` equation whose leading coefficient never vanishes."""
    coeffs = []
    for i in range(n):
        kind = rng.integers(0, 3)
        if kind == 0:
            coeffs.append(mul(float(rng.integers(-2, 3)), X) if rng.random() < 0.5 else
                          polynomial([float(rng.integers(-2, 3))]))
        elif kind == 1:
            coeffs.append(sin(mul(float(rng.choice(RATES)), X)))
        else:
            coeffs.append(polynomial([float(rng.integers(-2, 3)), float(rng.integers(-2, 3))]))
    lead = float(rng.choice([-2.0, -1.0, 1.0, 2.0]))
    coeffs.append(add(lead, mul(0.5 * np.sign(lead), cos(X))) if rng.random() < 0.5 else
                  polynomial([lead]))
    rhs = polynomial([float(rng.integers(-2, 3))]) if rng.random() < 0.5 else mul(0, X)
    return OdeSpec(tuple(coeffs), rhs, window)
