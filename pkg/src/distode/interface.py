"""Interface conditions ``A psi(x0-) = B psi(x0+)`` and the operator that encodes them.

For an ``m x n`` pair ``(A, B)`` at ``x0`` the interface operator is

    F psi = sum_{i<m, j<n} A_ij D^i (psi^(j) * delta(x - x0)) - B_ij D^i (delta(x - x0) * psi^(j))

which collapses to ``sum_i (A psi_-(x0) - B psi_+(x0))_i delta^(i)(x - x0)``, where
``psi_+-(x0)`` are the one-sided jets of length ``n``.  Its kernel is exactly the
set of ``psi`` that satisfy the conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .distcore import PiecewiseDist, as_dist, canonicalize, derivative, lateral_trace
from .errors import ConstructionError
from .smoothfn import ZERO
from .staralg import delta_shift, tilde_d

RANK_RTOL = 1e-10

SEPARATING = "separating"
INTERACTING = "interacting"
PARTIAL = "partially-interacting"


def _as_matrix(value, name: str) -> np.ndarray:
    try:
        mat = np.array(value, dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ConstructionError(f"{name} is not a numeric matrix") from exc
    if mat.ndim == 1 and mat.size == 0:
        mat = mat.reshape(0, 0)
    if mat.ndim != 2:
        raise ConstructionError(f"{name} must be two-dimensional, got shape {mat.shape}")
    return mat


@dataclass(frozen=True, eq=False)
class InterfaceSpec:
    """Conditions ``A psi(x0-) = B psi(x0+)`` on jets of length ``n``."""

    point: float
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = _as_matrix(self.A, "A")
        B = _as_matrix(self.B, "B")
        if A.shape != B.shape:
            raise ConstructionError(f"A and B must have the same shape, got {A.shape} and {B.shape}")
        m, n = A.shape
        if m > n:
            raise ConstructionError(f"m ≤ n violated: A and B are {m}x{n}")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "point", float(self.point))
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @classmethod
    def none(cls, point: float, n: int) -> InterfaceSpec:
        """No conditions at all (``A = B = 0``)."""
        return cls(point, np.zeros((n, n)), np.zeros((n, n)))

    @classmethod
    def continuous(cls, point: float, n: int) -> InterfaceSpec:
        """Continuity of the jet (``A = B = 1``)."""
        return cls(point, np.eye(n), np.eye(n))

    def residual(self, psi: PiecewiseDist) -> np.ndarray:
        """``A psi_-(x0) - B psi_+(x0)``."""
        psi = as_dist(psi)
        minus = lateral_trace(psi, self.point, "-", self.n)
        plus = lateral_trace(psi, self.point, "+", self.n)
        return self.A @ minus - self.B @ plus

    def to_dict(self) -> dict:
        def enc(mat):
            return [[{"re": z.real, "im": z.imag} for z in row] for row in mat]

        return {"point": self.point, "A": enc(self.A), "B": enc(self.B)}

    @classmethod
    def from_dict(cls, data: Mapping) -> InterfaceSpec:
        def dec(rows, name):
            if not isinstance(rows, Sequence) or isinstance(rows, str):
                raise ConstructionError(f"interface field {name!r} must be a list of rows")
            out = []
            for row in rows:
                vals = []
                for z in row:
                    if isinstance(z, Mapping):
                        vals.append(complex(float(z.get("re", 0.0)), float(z.get("im", 0.0))))
                    else:
                        vals.append(complex(z))
                out.append(vals)
            return out

        for key in ("point", "A", "B"):
            if key not in data:
                raise ConstructionError(f"interface spec is missing field {key!r}")
        A, B = dec(data["A"], "A"), dec(data["B"], "B")
        if not A:
            width = 0
            A = np.zeros((0, width))
            B = np.zeros((0, width))
        return cls(float(data["point"]), A, B)


# ---------------------------------------------------------------------------
# the operator


def f_hat_shift(spec: InterfaceSpec, psi) -> PiecewiseDist:
    """Interface operator assembled from shifting deltas and derivatives."""
    psi = as_dist(psi)
    x0 = spec.point
    derivs = [psi]
    for _ in range(1, spec.n):
        derivs.append(derivative(derivs[-1], 1))
    left = [delta_shift("-", 0, x0, d) for d in derivs]
    right = [delta_shift("+", 0, x0, d) for d in derivs]
    out = PiecewiseDist.zero()
    for i in range(spec.m):
        row = PiecewiseDist.zero()
        for j in range(spec.n):
            if spec.A[i, j] != 0:
                row = row + left[j].scale(spec.A[i, j])
            if spec.B[i, j] != 0:
                row = row - right[j].scale(spec.B[i, j])
        out = out + derivative(row, i)
    return out


def f_hat_trace(spec: InterfaceSpec, psi) -> PiecewiseDist:
    """Interface operator from one-sided jets: ``sum_i r_i delta^(i)(x - x0)``."""
    r = spec.residual(psi)
    deltas = {(0, i): c for i, c in enumerate(r)}
    return canonicalize([spec.point], [ZERO, ZERO], deltas)


def in_kernel(spec: InterfaceSpec, psi, tol: float = 1e-9) -> bool:
    r = spec.residual(psi)
    return bool(r.size == 0 or np.max(np.abs(r)) <= tol)


# ---------------------------------------------------------------------------
# classification


def matrix_rank(mat: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Rank by Gaussian elimination with complete pivoting.

    A pivot counts while it exceeds ``rtol`` times the largest entry of the
    original matrix.
    """
    work = np.array(mat, dtype=complex)
    if work.size == 0:
        return 0
    scale = np.abs(work).max()
    if scale == 0:
        return 0
    threshold = rtol * scale
    rows, cols = work.shape
    rank = 0
    for k in range(min(rows, cols)):
        sub = np.abs(work[k:, k:])
        p, q = np.unravel_index(int(np.argmax(sub)), sub.shape)
        if sub[p, q] <= threshold:
            break
        p += k
        q += k
        work[[k, p]] = work[[p, k]]
        work[:, [k, q]] = work[:, [q, k]]
        factors = work[k + 1:, k] / work[k, k]
        work[k + 1:, k:] -= np.outer(factors, work[k, k:])
        rank += 1
    return rank


@dataclass(frozen=True)
class InterfaceClass:
    tag: str
    dimension: int
    rank_a: int
    rank_b: int
    rank_ab: int
    rows: int

    @property
    def rank_deficient(self) -> bool:
        """Rows of ``[A | -B]`` are linearly dependent."""
        return self.rank_ab < self.rows


def classify(spec: InterfaceSpec) -> InterfaceClass:
    """Separating, interacting or partially interacting, plus the fiber dimension.

    ``dimension`` is ``n - rank B``: the freedom left in the plus-side jet once
    the minus-side jet is fixed.
    """
    ra = matrix_rank(spec.A)
    rb = matrix_rank(spec.B)
    rab = matrix_rank(np.hstack([spec.A, -spec.B]))
    if rab == ra + rb:
        tag = SEPARATING
    elif rb == spec.n and spec.m == spec.n:
        tag = INTERACTING
    else:
        tag = PARTIAL
    return InterfaceClass(tag, spec.n - rb, ra, rb, rab, spec.m)


# ---------------------------------------------------------------------------
# the order-n operator (i D~)^n + F


def l_f_apply(order: int, spec: InterfaceSpec, psi) -> PiecewiseDist:
    """``i^n D~^n psi + F psi`` with the modified derivative taken at the interface point."""
    if order < 1:
        raise ValueError("order must be a positive integer")
    psi = as_dist(psi)
    main = tilde_d(psi, (spec.point,), order).scale(1j ** order)
    return main + f_hat_shift(spec, psi)


def l_f_domain_check(order: int, spec: InterfaceSpec, psi, tol: float = 1e-9) -> bool:
    """True iff ``l_f_apply`` leaves no delta term above ``tol``."""
    image = l_f_apply(order, spec, psi)
    return all(abs(c) <= tol for c in image.deltas.values())
