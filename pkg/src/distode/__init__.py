"""Piecewise smooth distributions, the star product, and ODEs with interface conditions."""

from __future__ import annotations

from .distcore import (
    Comparison,
    PiecewiseDist,
    TestFn,
    approx_equal,
    bump,
    canonicalize,
    derivative,
    lateral_trace,
    pair,
    refine,
)
from .dsl import parse, parse_dist, parse_smooth, print_dist
from .errors import (
    ConstructionError,
    DistodeError,
    DslSyntaxError,
    EvaluationError,
    NumericalError,
    ProblemError,
)
from .interface import (
    InterfaceClass,
    InterfaceSpec,
    classify,
    f_hat_shift,
    f_hat_trace,
    in_kernel,
    l_f_apply,
    l_f_domain_check,
)
from .odekit import (
    Ode2Operator,
    OdeSpec,
    Problem,
    SolutionReport,
    apply_ode2,
    build_ode2,
    form_equivalence,
    singular_coeffs,
    solve,
    verify,
)
from .smoothfn import SmoothExpr, combine, compose, diff, eval_jet
from .staralg import (
    PointSet,
    delta_shift,
    gamma,
    mollifier,
    mollifier_apply,
    star,
    tilde_d,
    tilde_d_binomial,
)

__all__ = [name for name in dir() if not name.startswith("_")]
