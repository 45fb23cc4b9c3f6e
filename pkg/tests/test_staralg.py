from __future__ import annotations

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from distode import PiecewiseDist, TestFn, approx_equal, derivative, pair
from distode.randfam import random_dist, random_smooth
from distode.smoothfn import ONE, ZERO, X, cos, diff, exp, mul, sin
from distode.staralg import (
    BUMP_NORM,
    PointSet,
    delta_shift,
    gamma,
    mollifier,
    mollifier_apply,
    star,
    tilde_d,
    tilde_d_binomial,
)

H = PiecewiseDist.heaviside()
HM = PiecewiseDist.heaviside_minus()
DELTA = PiecewiseDist.delta()


def delta(k, at=0.0, c=1.0):
    return PiecewiseDist.delta(k, at, c)


def is_zero(F: PiecewiseDist) -> bool:
    return not F.deltas and all(p.is_zero() for p in F.pieces)


@pytest.mark.parametrize("k", [0, 1, 2])
def test_star_identities(k):
    assert star(delta(k), H).deltas == {(0, k): 1}
    assert is_zero(star(H, delta(k)))


def test_star_delta_products_vanish():
    assert is_zero(star(DELTA, delta(1)))
    half = star(DELTA, H - 0.5)
    assert half.deltas == {(0, 0): 0.5}


def test_star_smooth_case():
    F = star(PiecewiseDist.smooth(sin(X)), PiecewiseDist.smooth(cos(X)))
    xs = np.linspace(-3, 3, 50)
    np.testing.assert_allclose(F(xs), np.sin(xs) * np.cos(xs), atol=1e-15)


def test_noncommutative():
    assert not approx_equal(star(H, DELTA), star(DELTA, H), 1e-12)


def test_delta_shift_examples():
    assert delta_shift("+", 0, 0.0, H).deltas == {(0, 0): 1}
    assert is_zero(delta_shift("-", 0, 0.0, H))
    f = exp(mul(2, X))
    # delta' f = f(0) delta' - f'(0) delta
    got = delta_shift("+", 1, 0.0, f)
    assert got.deltas == pytest.approx({(0, 1): 1, (0, 0): -2})
    # translated: jets taken at x0
    got = delta_shift("-", 1, 0.5, f)
    e = np.exp(1.0)
    assert got.deltas[(0, 1)] == pytest.approx(e) and got.deltas[(0, 0)] == pytest.approx(-2 * e)


def test_gamma_examples():
    assert gamma(0, 0.0, H).deltas == {(0, 0): -1}
    assert is_zero(gamma(0, 0.0, sin(X)))
    assert gamma(1, 0.0, H).deltas == {(0, 1): -1}


def test_tilde_d_examples():
    assert is_zero(tilde_d(H, [0.0], 1))
    assert is_zero(tilde_d(HM, [0.0], 1))
    got = tilde_d(PiecewiseDist.smooth(sin(X)), [0.0], 1)
    assert got.pieces == (cos(X),)
    fm, fp = exp(X), sin(mul(3, X))
    F = PiecewiseDist.two_sided(fm, fp) + DELTA
    expect = PiecewiseDist.two_sided(diff(fm, 2), diff(fp, 2)) + delta(2)
    assert approx_equal(tilde_d(F, [0.0], 2), expect, 1e-12)


def test_binomial_examples():
    assert is_zero(tilde_d_binomial(H, 1))
    s = PiecewiseDist.smooth(sin(X))
    assert approx_equal(tilde_d_binomial(s, 3), derivative(s, 3), 1e-14)
    Hx = PiecewiseDist.heaviside(0.0, X)
    assert is_zero(tilde_d(Hx, [0.0], 2))
    assert approx_equal(tilde_d_binomial(Hx, 2), PiecewiseDist.zero(), 1e-15)


def test_point_set():
    assert PointSet([1, -1, 0]) == (-1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        PointSet([0, 0])


def test_mollifier_properties():
    assert BUMP_NORM == pytest.approx(0.443993816168, abs=1e-11)
    for eps in (1.0, 0.1):
        v = mollifier(eps)
        mass, _ = sp_integrate.quad(lambda t: v(t).real, -eps, eps, epsabs=1e-13)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert v(0.3 * eps) == pytest.approx(v(-0.3 * eps), rel=1e-14)


def test_mollifier_examples(g):
    assert is_zero(mollifier_apply("-", 0, 1e-2, PiecewiseDist.zero()))
    # v(x - eps) is supported in [0, 2 eps] where H = 1
    for eps in (1e-1, 1e-2):
        got = pair(mollifier_apply("+", 0, eps, H), g)
        v = mollifier(eps, 0, eps)
        ref, _ = sp_integrate.quad(lambda t: (v(t) * g(t)).real, 0, 2 * eps, epsabs=1e-14)
        assert got == pytest.approx(ref, abs=1e-10)
    # smooth input: the shifted bump is centred at eps, so the error is O(eps)
    one = PiecewiseDist.smooth(ONE)
    errs = []
    for eps in (1e-1, 1e-2):
        got = pair(mollifier_apply("+", 0, eps, one), g)
        v = mollifier(eps, 0, eps)
        ref, _ = sp_integrate.quad(lambda t: (v(t) * g(t)).real, 0, 2 * eps, epsabs=1e-14)
        assert got == pytest.approx(ref, abs=1e-10)
        errs.append(abs(got - g(0.0)))
    assert errs[1] < errs[0] / 5


# ---------------------------------------------------------------------------
# laws on the seeded family


def test_associativity_and_distributivity(rng):
    for _ in range(15):
        F, G, K = (random_dist(rng) for _ in range(3))
        assert approx_equal(star(star(F, G), K), star(F, star(G, K)), 1e-10)
        assert approx_equal(star(F, G + K), star(F, G) + star(F, K), 1e-10)
        assert approx_equal(star(F + G, K), star(F, K) + star(G, K), 1e-10)


def test_leibniz_rules(rng):
    for _ in range(15):
        F, G = random_dist(rng), random_dist(rng)
        assert approx_equal(derivative(star(F, G), 1), star(derivative(F, 1), G) + star(F, derivative(G, 1)), 1e-10)
        pts = sorted(set(F.breakpoints) | set(G.breakpoints) | {0.0})
        lhs = tilde_d(star(F, G), pts, 1)
        rhs = star(tilde_d(F, pts, 1), G) + star(F, tilde_d(G, pts, 1))
        assert approx_equal(lhs, rhs, 1e-10)


def test_tilde_d_is_local(rng):
    for _ in range(20):
        F = random_dist(rng)
        out = tilde_d(F, [-1.0, 0.0, 1.0], 1)
        assert set(out.breakpoints) <= set(F.breakpoints)


def test_odd_symmetry(rng):
    sign = H.scale(2) - 1
    for _ in range(10):
        e = random_smooth(rng)
        even = mul(0.5, e + e.substitute(mul(-1, X)))
        F = star(sign, even)
        total = star(DELTA, F) + star(F, DELTA)
        assert all(abs(c) <= 1e-12 for c in total.deltas.values())
        assert all(p.is_zero() for p in total.pieces)


def test_binomial_matches_iteration(rng):
    for _ in range(8):
        F = random_dist(rng, points=(0.0,))
        for n in range(1, 6):
            assert approx_equal(tilde_d_binomial(F, n), tilde_d(F, [0.0], n), 1e-10)
