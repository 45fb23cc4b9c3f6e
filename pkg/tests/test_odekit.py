from __future__ import annotations

import math

import numpy as np
import pytest

from distode import PiecewiseDist, approx_equal
from distode.errors import ConstructionError, ProblemError
from distode.interface import InterfaceSpec, in_kernel
from distode.odekit import (
    OdeSpec,
    Problem,
    apply_ode2,
    build_ode2,
    form_equivalence,
    singular_coeffs,
    solve,
    verify,
)
from distode.randfam import random_dist, random_ode, random_spec
from distode.smoothfn import ZERO, X, add, cos, mul, sin

H = PiecewiseDist.heaviside()
INIT = (-1.0, (math.cos(-1.0), -math.sin(-1.0)))


def helmholtz(k=1.0, window=(-5.0, 5.0), rhs=ZERO):
    return OdeSpec((k * k, 0, 1), rhs, window)


def well(k1, k2, point=0.0):
    return InterfaceSpec(point, np.diag([k1, k2]), np.eye(2))


def candidate():
    return PiecewiseDist.two_sided(cos(X), mul(2, cos(X)))


def is_zero(F):
    return not F.deltas and all(p.is_zero() for p in F.pieces)


# ---------------------------------------------------------------------------
# equation data


def test_leading_coefficient_must_not_vanish():
    with pytest.raises(ConstructionError, match="a_n vanishes near x=0"):
        OdeSpec((0, 0, X))
    with pytest.raises(ConstructionError, match="a_n vanishes near x=0.5"):
        OdeSpec((0, add(X, -0.5)), window=(-1, 1))
    OdeSpec((0, add(X, -0.5)), window=(1, 2))


def test_singular_coeffs_structure():
    a_t, b_t = singular_coeffs(helmholtz(), [0.0])
    assert a_t[0].pieces[0](0.3) == 0.5 and a_t[0].deltas == {(0, 1): -1}
    assert a_t[1].deltas == {(0, 0): -2} and a_t[1].pieces[0].is_zero()
    assert not a_t[2].deltas and a_t[2].pieces[0](0.0) == 0.5
    for a, b, c in zip(a_t, b_t, (1, 0, 1)):
        assert approx_equal(a + b, PiecewiseDist.smooth(c), 1e-12)


def test_singular_coeffs_sum_on_random_equations(rng):
    for _ in range(10):
        ode = random_ode(rng, int(rng.integers(1, 4)))
        a_t, b_t = singular_coeffs(ode, [-1.0, 0.5])
        for a, b, c in zip(a_t, b_t, ode.coeffs):
            assert approx_equal(a + b, PiecewiseDist.smooth(c), 1e-12)


def test_build_rejects_bad_interfaces():
    with pytest.raises(ConstructionError, match="distinct"):
        build_ode2(helmholtz(), [well(1, 1), well(2, 2)])
    with pytest.raises(ConstructionError):
        build_ode2(helmholtz(), [InterfaceSpec(0.0, [[1]], [[1]])])
    with pytest.raises(ConstructionError):
        build_ode2(helmholtz(), [], form="weird")


@pytest.mark.parametrize("form", ["tilde", "star"])
def test_apply_examples(form):
    op = build_ode2(helmholtz(), [well(2, 3)], form)
    assert is_zero(apply_ode2(op, candidate()))
    res = apply_ode2(op, H)
    assert res.deltas and not verify(op, H)
    assert is_zero(apply_ode2(op, PiecewiseDist.zero()))


@pytest.mark.parametrize("form", ["tilde", "star"])
def test_continuous_conditions_reproduce_the_equation(form):
    op = build_ode2(helmholtz(2.0), [InterfaceSpec(0.0, np.eye(2), np.eye(2))], form)
    assert is_zero(apply_ode2(op, PiecewiseDist.smooth(sin(mul(2, X)))))
    psi = PiecewiseDist.smooth(mul(X, X))
    res = apply_ode2(op, psi)
    assert not res.deltas
    xs = np.linspace(-3, 3, 17)
    np.testing.assert_allclose(res(xs), 2 + 4 * xs**2, atol=1e-12)


def test_no_conditions_has_no_interface_term():
    op = build_ode2(helmholtz(), [InterfaceSpec.none(0.0, 2)])
    psi = PiecewiseDist.two_sided(cos(X), sin(X))
    assert is_zero(apply_ode2(op, psi))


def test_form_equivalence_examples(rng):
    ode = helmholtz()
    assert form_equivalence(ode, [well(2, 3)], H)
    assert form_equivalence(ode, [well(2, 3)], PiecewiseDist.delta(1, 0.5))
    for _ in range(20):
        n = int(rng.integers(1, 4))
        ode = random_ode(rng, n)
        specs = [random_spec(rng, n, p) for p in (-1.0, 0.0)]
        psi = random_dist(rng)
        assert form_equivalence(ode, specs, psi, 1e-9)


def test_verify_trivial():
    op = build_ode2(OdeSpec((0, 1)), [])
    assert verify(op, PiecewiseDist.zero()).passed


# ---------------------------------------------------------------------------
# solving


def _max_err(psi, minus, plus, lo=-5.0, hi=5.0):
    xm = np.linspace(lo, 0, 400)[:-1]
    xp = np.linspace(0, hi, 400)[1:]
    return max(np.abs(psi(xm) - minus(xm)).max(), np.abs(psi(xp) - plus(xp)).max())


def test_solve_interacting_well():
    rep = solve(helmholtz(), [well(2, 3)], INIT, window=(-5, 5))
    assert rep.consistent and rep.family_dim == 0 and len(rep.solutions) == 1
    assert _max_err(rep.particular, np.cos, lambda x: 2 * np.cos(x)) <= 1e-8
    assert rep.residual.passed
    for form in ("tilde", "star"):
        assert verify(build_ode2(helmholtz(), [well(2, 3)], form), rep.particular, 1e-7)
    assert rep.to_dict()["interfaces"] == [{"point": 0.0, "status": "unique", "fiber_dim": 0}]


def test_solve_confining_case():
    rep = solve(helmholtz(), [well(0, 0)], INIT, window=(-5, 5))
    assert rep.consistent and rep.particular.pieces[1].is_zero()
    assert _max_err(rep.particular, np.cos, np.zeros_like) <= 1e-8
    # B = I pins the plus jet to zero; only the minus side carries data
    assert rep.family_dim == 0 and rep.dimension == 2


def test_partial_conditions_leave_a_family():
    spec = InterfaceSpec(0.0, [[1, 0]], [[1, 0]])  # value continuous, slope free
    rep = solve(helmholtz(), [spec], INIT, window=(-5, 5))
    assert rep.family_dim == 1 and rep.dimension == 3 and len(rep.solutions) == 2
    assert rep.interfaces[0].status == "family" and rep.residual.passed
    step = rep.solutions[1] - rep.solutions[0]
    xs = np.linspace(0.1, 4.9, 30)
    np.testing.assert_allclose(step(-xs), 0, atol=1e-12)
    ratio = step(xs) / np.sin(xs)
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-9)


def test_no_conditions_doubles_the_dimension():
    rep = solve(helmholtz(), [InterfaceSpec.none(0.0, 2)], INIT, window=(-5, 5))
    assert rep.dimension == 4
    assert rep.residual.passed


def test_inconsistent_interface_reports_no_solution():
    spec = InterfaceSpec(0.0, [[1, 0]], [[0, 0]])  # forces psi(0-) = 0
    rep = solve(helmholtz(), [spec], INIT, window=(-5, 5))
    assert not rep.consistent and rep.solutions == []
    assert rep.interfaces[0].status == "inconsistent"


def test_numeric_path_matches_exact():
    exact = solve(helmholtz(), [well(2, 3)], INIT, window=(-5, 5), method="exact")
    numeric = solve(helmholtz(), [well(2, 3)], INIT, window=(-5, 5), method="numeric")
    xs = np.linspace(-4.9, 4.9, 97)
    np.testing.assert_allclose(numeric.particular(xs), exact.particular(xs), atol=1e-8)
    assert numeric.residual.passed


def test_numeric_variable_coefficients_two_interfaces():
    ode = OdeSpec((add(1, mul(0.5, sin(X))), mul(0.1, X), 1), 1, (-3, 3))
    specs = [well(2, 0.5, -1.0), InterfaceSpec(1.0, [[1, 0], [1, 1]], [[1, 0], [0, 1]])]
    rep = solve(ode, specs, (0.0, (1.0, 0.0)))
    assert rep.consistent and rep.residual.passed
    psi = rep.particular
    for s in specs:
        assert in_kernel(s, psi, 1e-7)
    assert not psi.deltas


def test_solve_from_the_right():
    rep = solve(helmholtz(), [well(2, 3)], (1.0, (2 * math.cos(1.0), -2 * math.sin(1.0))), window=(-5, 5))
    assert _max_err(rep.particular, np.cos, lambda x: 2 * np.cos(x)) <= 1e-8


def test_inhomogeneous_exact():
    rep = solve(helmholtz(rhs=3), [well(2, 3)], INIT, window=(-5, 5))
    assert rep.residual.passed
    # psi_- = 3 + c1 cos x + c2 sin x through the initial jet
    xs = np.linspace(-4.9, -0.1, 50)
    c = np.linalg.solve([[math.cos(-1), math.sin(-1)], [-math.sin(-1), math.cos(-1)]],
                        [math.cos(-1) - 3, -math.sin(-1)])
    np.testing.assert_allclose(rep.particular(xs), 3 + c[0] * np.cos(xs) + c[1] * np.sin(xs), atol=1e-9)


def test_solve_rejects_bad_initial_data():
    with pytest.raises(ConstructionError):
        solve(helmholtz(), [well(2, 3)], (0.0, (1, 0)))
    with pytest.raises(ConstructionError):
        solve(helmholtz(), [well(2, 3)], (-1.0, (1,)))
    with pytest.raises(ConstructionError):
        solve(helmholtz(), [well(2, 3)], (-9.0, (1, 0)), window=(-5, 5))


# ---------------------------------------------------------------------------
# problem documents

WELL_DOC = {
    "ode": {"order": 2, "coeffs": ["1", "0", "1"], "rhs": "0"},
    "interfaces": [{"point": 0, "A": [[2, 0], [0, 3]], "B": [[1, 0], [0, 1]]}],
    "window": [-5, 5],
    "init": {"x": -1, "jet": [math.cos(-1.0), -math.sin(-1.0)]},
}


def test_problem_round_trip():
    prob = Problem.from_dict(WELL_DOC)
    again = Problem.from_dict(prob.to_dict())
    assert again.ode.order == 2 and again.window == (-5.0, 5.0)
    assert again.init[0] == -1.0
    np.testing.assert_array_equal(again.interfaces[0].A, np.diag([2, 3]))


@pytest.mark.parametrize(
    "patch, field",
    [
        ({"ode": {"coeffs": ["1"]}}, "ode.coeffs"),
        ({"ode": {"order": 3, "coeffs": ["1", "0", "1"]}}, "ode.order"),
        ({"window": [1]}, "window"),
        ({"init": {"x": 0}}, "init.jet"),
        ({"init": {"x": 0, "jet": [1]}}, "init.jet"),
        ({"interfaces": [{"point": 0, "A": [[1]], "B": [[1]]}]}, "interfaces[0]"),
    ],
)
def test_problem_errors_name_the_field(patch, field):
    doc = {**WELL_DOC, **patch}
    with pytest.raises(ProblemError) as info:
        Problem.from_dict(doc)
    assert info.value.field == field
    assert repr(field) in str(info.value)


def test_problem_invariants():
    doc = {**WELL_DOC, "interfaces": [{"point": 0, "A": [[1, 0]] * 3, "B": [[1, 0]] * 3}]}
    with pytest.raises(ConstructionError, match="m ≤ n violated"):
        Problem.from_dict(doc)
    doc = {**WELL_DOC, "ode": {"order": 2, "coeffs": ["1", "0", "x"]}}
    with pytest.raises(ConstructionError, match="a_n vanishes near x=0"):
        Problem.from_dict(doc)
