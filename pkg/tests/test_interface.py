from __future__ import annotations

import numpy as np
import pytest

from distode import PiecewiseDist, approx_equal, derivative
from distode.errors import ConstructionError
from distode.interface import (
    INTERACTING,
    PARTIAL,
    SEPARATING,
    InterfaceSpec,
    classify,
    f_hat_shift,
    f_hat_trace,
    in_kernel,
    l_f_apply,
    l_f_domain_check,
    matrix_rank,
)
from distode.randfam import random_dist, random_spec, random_two_sided
from distode.smoothfn import X, cos, exp, mul, sin

H = PiecewiseDist.heaviside()
HM = PiecewiseDist.heaviside_minus()


def well(k1, k2):
    return InterfaceSpec(0.0, np.diag([k1, k2]), np.eye(2))


def well_solution():
    return PiecewiseDist.two_sided(cos(X), mul(2, cos(X)))


def only_deltas_at(F, x0):
    assert all(p.is_zero() for p in F.pieces)
    assert all(F.breakpoints[i] == x0 for i, _ in F.deltas)


@pytest.mark.parametrize("f_hat", [f_hat_shift, f_hat_trace])
def test_f_hat_examples(f_hat):
    out = f_hat(well(2, 3), H)
    only_deltas_at(out, 0.0)
    assert out.deltas == pytest.approx({(0, 0): -1})
    zero = InterfaceSpec.none(0.0, 2)
    assert not f_hat(zero, well_solution()).deltas
    smooth = PiecewiseDist.smooth(exp(sin(X)))
    assert not f_hat(well(1, 1), smooth).deltas


def test_spec_validation_and_json():
    with pytest.raises(ConstructionError, match="m ≤ n violated"):
        InterfaceSpec(0.0, np.ones((3, 2)), np.ones((3, 2)))
    with pytest.raises(ConstructionError):
        InterfaceSpec(0.0, np.ones((1, 2)), np.ones((1, 3)))
    spec = InterfaceSpec(0.5, [[1 + 2j, 0]], [[0, -1j]])
    again = InterfaceSpec.from_dict(spec.to_dict())
    assert again.point == 0.5
    np.testing.assert_array_equal(again.A, spec.A)
    np.testing.assert_array_equal(again.B, spec.B)


def test_in_kernel_examples():
    spec = well(2, 3)
    assert in_kernel(spec, well_solution())
    assert not in_kernel(spec, H)
    assert in_kernel(InterfaceSpec.none(0.0, 2), H)


def test_classify_examples():
    c = classify(well(2, 3))
    assert (c.tag, c.dimension) == (INTERACTING, 0)
    assert classify(well(0, 0)).tag == SEPARATING
    c = classify(InterfaceSpec(0.0, [[1, 0]], [[1, 0]]))
    assert (c.tag, c.dimension) == (PARTIAL, 1)
    assert classify(InterfaceSpec.none(0.0, 2)).tag == SEPARATING
    assert classify(InterfaceSpec.none(0.0, 2)).dimension == 2
    dup = classify(InterfaceSpec(0.0, [[1, 0], [2, 0]], [[1, 0], [2, 0]]))
    assert dup.rank_deficient


def test_matrix_rank_matches_numpy(rng):
    for _ in range(50):
        m, n, r = rng.integers(1, 6), rng.integers(1, 6), rng.integers(0, 6)
        r = min(r, m, n)
        mat = rng.normal(size=(m, r)) @ rng.normal(size=(r, n))
        assert matrix_rank(mat) == np.linalg.matrix_rank(mat)


def test_l_f_examples():
    psi = PiecewiseDist.two_sided(cos(X), sin(X))
    out = l_f_apply(2, InterfaceSpec.none(0.0, 2), psi)
    assert approx_equal(out, psi, 1e-14)
    smooth = PiecewiseDist.smooth(sin(X))
    out = l_f_apply(1, InterfaceSpec(0.0, [[1]], [[1]]), smooth)
    assert approx_equal(out, PiecewiseDist.smooth(mul(1j, cos(X))), 1e-14)
    out = l_f_apply(2, well(0, 0), H)
    assert out.deltas == pytest.approx({(0, 0): -1})


def test_l_f_domain_examples():
    eye = InterfaceSpec(0.0, np.eye(2), np.eye(2))
    assert l_f_domain_check(2, eye, PiecewiseDist.smooth(cos(X)))
    assert not l_f_domain_check(2, eye, H)
    assert l_f_domain_check(2, well(2, 3), well_solution())


# ---------------------------------------------------------------------------
# seeded family


def test_dual_forms_agree(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        spec = random_spec(rng, n, float(rng.choice([-1.0, 0.0, 1.0])))
        psi = random_dist(rng)
        a, b = f_hat_shift(spec, psi), f_hat_trace(spec, psi)
        only_deltas_at(a, spec.point)
        assert approx_equal(a, b, 1e-12)


def test_kernel_matches_domain(rng):
    for _ in range(50):
        n = int(rng.integers(1, 5))
        spec = random_spec(rng, n)
        psi = random_two_sided(rng, spec)
        assert in_kernel(spec, psi, 1e-8) == l_f_domain_check(n, spec, psi, 1e-8)


def test_no_conditions_gives_pure_derivative(rng):
    for n in (1, 2, 3, 4):
        spec = InterfaceSpec.none(0.0, n)
        psi = random_two_sided(rng, spec)
        out = l_f_apply(n, spec, psi)
        ref = PiecewiseDist.two_sided(*(
            derivative(PiecewiseDist.smooth(p), n).pieces[0] for p in psi.pieces
        )).scale(1j ** n)
        assert not out.deltas
        assert approx_equal(out, ref, 1e-9)
