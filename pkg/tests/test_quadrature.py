from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from distode import quadrature
from distode.errors import NumericalError


def test_rule_weights():
    assert quadrature.KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    assert quadrature.GAUSS_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-15)
    # the 7-point Gauss rule is exact through degree 13
    nodes = quadrature.NODES
    assert np.dot(quadrature.GAUSS_WEIGHTS, nodes**12) == pytest.approx(2 / 13, rel=1e-14)


def test_polynomial_and_oscillatory():
    value, err = quadrature.integrate(lambda x: x**22, -1.0, 1.0)
    assert value == pytest.approx(2 / 23, abs=1e-12)
    value, _ = quadrature.integrate(lambda x: np.exp(1j * 7 * x), 0.0, 3.0)
    assert value == pytest.approx((np.exp(21j) - 1) / 7j, abs=1e-10)


def test_bump_against_scipy():
    f = lambda t: np.exp(-1.0 / (1.0 - t * t))
    ours, _ = quadrature.integrate(f, -1.0, 1.0, tol=1e-13)
    ref, _ = sp_integrate.quad(lambda t: math.exp(-1.0 / (1.0 - t * t)), -1, 1, epsabs=1e-14)
    assert ours.real == pytest.approx(ref, abs=1e-12)


def test_panel_cap_reports_estimate():
    with pytest.raises(NumericalError) as info:
        quadrature.integrate(lambda x: np.sign(x - 0.3) * np.abs(x - 0.3) ** -0.9, 0.0, 1.0,
                             tol=1e-14, max_panels=8)
    assert info.value.estimate is not None and info.value.estimate > 0
