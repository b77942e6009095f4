"""Bounded right inverses of surjective matrices under l1 control.

For T : R^n -> R^m surjective and a bound C, the sets

    Phi(e_j) = {x in R^n : T x = e_j, ||x||_1 <= C}

are polytopes (write x = p - q with p, q >= 0 and sum(p + q) <= C).  Picking
one point per column gives M with T M = I and column l1 norms <= C, and the
max column norm is the operator norm (R^m, l1) -> (R^n, l1).

A prescribed pair M(Tz) = z is possible exactly when z lies in
sum_j (Tz)_j Phi(e_j), since R^m_+ is simplicial.  That is one feasibility
problem; when it fails the dual certificate is returned.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import numerics as nx
from .errors import BoundTooSmall, MixedDimensions, NegativeImage, NonpositiveScalar, NotGenerating, NotSurjective
from .numerics import ONE, ZERO, Certificate, LinearProgram, Matrix, Vector
from .polytope import ImplicitPolytope, implicit_product, with_linear_equations
from .selection import BasisTableSelection, FunctionalSet, TomoCoords, tomo_reconstruct

log = logging.getLogger(__name__)


def l1_operator_norm(M: Sequence[Sequence]) -> Fraction:
    """Norm of M from (R^m, l1) to (R^n, l1): the largest column l1 norm."""
    cols = nx.transpose(M)
    return max((nx.l1_norm(c) for c in cols), default=ZERO)


def _surjective(T) -> Matrix:
    T = nx.matrix(T)
    if not T or not T[0]:
        raise MixedDimensions("empty matrix")
    if nx.rank(T) != len(T):
        raise NotSurjective(f"rank {nx.rank(T)} is below the number of rows {len(T)}")
    return T


@dataclass(frozen=True)
class RightInverseProblem:
    """Find M with T M = I and column l1 norms at most C (optionally M(Tz) = z)."""

    T: tuple
    C: Fraction
    preserve: Vector | None = None

    def __post_init__(self):
        object.__setattr__(self, "T", _surjective(self.T))
        C = nx.to_rational(self.C)
        if C <= 0:
            raise NonpositiveScalar("the bound C must be positive")
        object.__setattr__(self, "C", C)
        if self.preserve is not None:
            z = nx.vector(self.preserve)
            if len(z) != self.n:
                raise MixedDimensions(f"z has {len(z)} entries, T has {self.n} columns")
            object.__setattr__(self, "preserve", z)

    @property
    def m(self) -> int:
        return len(self.T)

    @property
    def n(self) -> int:
        return len(self.T[0])


@dataclass(frozen=True)
class RightInverse:
    M: tuple
    norm: Fraction

    @classmethod
    def of(cls, columns: Sequence[Vector]) -> "RightInverse":
        M = nx.transpose(columns)
        return cls(M, l1_operator_norm(M))

    def __call__(self, y: Sequence) -> Vector:
        return nx.mat_vec(self.M, y)


@dataclass(frozen=True)
class Impossible:
    """No right inverse through the prescribed point.

    ``kind`` is ``"norm"`` (||z||_1 > C ||Tz||_1, which no M of norm <= C can
    bridge) or ``"farkas"`` (an infeasibility certificate of the
    decomposition system).
    """

    kind: str
    z_norm: Fraction
    bound: Fraction
    certificate: Certificate | None = None
    program: LinearProgram | None = None

    def verify(self) -> bool:
        if self.kind == "norm":
            return self.z_norm > self.bound
        return self.certificate is not None and self.certificate.verify(self.program)

    def __bool__(self):
        return False


def _ell1_program(T: Matrix, rhs: Vector, C) -> tuple[LinearProgram, tuple]:
    """{(p, q) >= 0 : T(p - q) = rhs, sum(p + q) <= C} and the image map to x = p - q."""
    n = len(T[0])
    eqs = [(tuple(row) + tuple(-a for a in row), r) for row, r in zip(T, rhs)]
    ge = [((-ONE,) * (2 * n), -nx.to_rational(C))] if C is not None else []
    lp = LinearProgram.build(2 * n, eq=eqs, ge=ge)
    image = tuple(tuple(ONE if j == i else (-ONE if j == n + i else ZERO) for j in range(2 * n)) for i in range(n))
    return lp, image


def phi_set(T, j: int, C) -> ImplicitPolytope:
    """Phi(e_j) as an implicit polytope."""
    T = nx.matrix(T)
    lp, image = _ell1_program(T, nx.unit(len(T), j), C)
    return ImplicitPolytope(lp, image, nx.zeros(len(T[0])))


def min_inverse_constant(T) -> Fraction:
    """max_j min{||x||_1 : T x = e_j}, the smallest C for which every Phi(e_j) is nonempty."""
    T = _surjective(T)
    n = len(T[0])
    best = ZERO
    for j in range(len(T)):
        lp, _ = _ell1_program(T, nx.unit(len(T), j), None)
        res = nx.optimize(lp.with_objective((ONE,) * (2 * n)), "min")
        best = max(best, res.value)
    return best


def _check_bound(p: RightInverseProblem) -> Fraction:
    c_min = min_inverse_constant(p.T)
    if p.C < c_min:
        raise BoundTooSmall(c_min)
    return c_min


def _default_column(p: RightInverseProblem, j: int, theta) -> Vector:
    K = phi_set(p.T, j, p.C)
    return tomo_reconstruct(K, TomoCoords.constant(theta, p.n), FunctionalSet.coordinates(p.n))


def right_inverse(p: RightInverseProblem, theta=0) -> RightInverse:
    """Column j is the tomographical point of Phi(e_j) with all thetas equal to ``theta``."""
    _check_bound(p)
    return RightInverse.of([_default_column(p, j, theta) for j in range(p.m)])


def right_inverse_through(p: RightInverseProblem, theta=0) -> RightInverse | Impossible:
    """A right inverse M of norm <= C with M(Tz) = z, or a certificate that none exists."""
    z = p.preserve
    if z is None:
        raise MixedDimensions("the problem has no point to preserve")
    y = nx.mat_vec(p.T, z)
    if any(v < 0 for v in y):
        raise NegativeImage(f"T z = {y} has negative entries")
    _check_bound(p)
    z_norm, bound = nx.l1_norm(z), p.C * nx.l1_norm(y)
    if z_norm > bound:
        return Impossible("norm", z_norm, bound)
    active = [j for j, v in enumerate(y) if v]
    columns = {}
    if active:
        P = implicit_product([phi_set(p.T, j, p.C) for j in active])
        n, k = p.n, len(active)
        rows = []
        for i in range(n):
            a = [ZERO] * (n * k)
            for slot, j in enumerate(active):
                a[slot * n + i] = y[j]
            rows.append((tuple(a), z[i]))
        P = with_linear_equations(P, rows)
        res = nx.solve_feasibility(P.lp)
        if not res.feasible:
            return Impossible("farkas", z_norm, bound, res.certificate, P.lp)
        D = FunctionalSet.coordinates(n).blockwise(k)
        point = tomo_reconstruct(P, TomoCoords.constant(theta, n * k), D)
        for slot, j in enumerate(active):
            columns[j] = point[slot * n : (slot + 1) * n]
    elif any(z):
        # unreachable: ||z|| > 0 = C ||Tz|| is caught by the norm test
        raise AssertionError("nonzero z with Tz = 0 passed the norm test")
    cols = [columns[j] if j in columns else _default_column(p, j, theta) for j in range(p.m)]
    return RightInverse.of(cols)


# --- extension from a generating cone ------------------------------------------


@dataclass(frozen=True)
class LinearExtension:
    """The linear map on the whole space agreeing with a selection on a generating cone."""

    matrix: tuple
    selection: BasisTableSelection

    def __call__(self, v: Sequence) -> Vector:
        return nx.mat_vec(self.matrix, v)

    def from_difference(self, x: Sequence, y: Sequence) -> Vector:
        """phi(x) - phi(y) for cone points x, y; equals self(x - y)."""
        return nx.sub(self.selection(x), self.selection(y))

    def cone_norm(self) -> Fraction:
        """sup ||phi(g)||_1 / ||g||_1 over the generators."""
        gens = self.selection.domain.generators
        return max(nx.l1_norm(t) / nx.l1_norm(g) for g, t in zip(gens, self.selection.table))


def extend_linear(phi: BasisTableSelection, space_dim: int | None = None) -> LinearExtension:
    """Extend phi from its cone to the span by phi(x - y) = phi(x) - phi(y)."""
    gens = phi.domain.generators
    d = phi.domain.dim if space_dim is None else space_dim
    if phi.domain.dim != d or nx.rank(gens) != d:
        raise NotGenerating(f"the cone does not span R^{d}")
    # M G = A with G the generator columns, A the table columns
    G = nx.transpose(gens)
    A = nx.transpose(phi.table)
    Ginv = nx.transpose([nx.solve_unique(G, nx.unit(d, i)) for i in range(d)])
    return LinearExtension(nx.mat_mul(A, Ginv), phi)
