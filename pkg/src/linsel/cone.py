"""Finitely generated convex cones.

A :class:`Cone` is the set of nonnegative combinations of its generators.
Optionally it can be restricted to a union of relatively open faces of that
closed cone; this is how cones that are not closed, such as a cone over an
open square together with part of its boundary, are represented exactly.
Membership in the relative interior of a face is a strict linear
inequality system, which the solver in :mod:`linsel.numerics` decides with
certificates.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from . import numerics as nx
from .errors import (
    DimensionBudget,
    EmptyInput,
    InputError,
    MixedDimensions,
    NoBase,
    NoConeBasis,
    NotInCone,
    NotPointed,
    SumMismatch,
)
from .numerics import ONE, ZERO, Certificate, LinearProgram, Vector
from .polytope import ImplicitPolytope, Polytope, canonicalize

ORDER_INTERVAL_MAX_DIM = 4


def ray_canonical(v: Sequence) -> Vector:
    """Positive rescaling of v whose first nonzero coordinate is +1 or -1."""
    v = nx.vector(v)
    lead = next((a for a in v if a), None)
    if lead is None:
        raise InputError("the zero vector does not span a ray")
    return nx.scale(1 / abs(lead), v)


def random_rational(rng: random.Random, low: int = 0, high: int = 1, den: int = 8) -> Fraction:
    """Random rational in [low, high] with denominator dividing ``den``."""
    return Fraction(rng.randint(low * den, high * den), den)


@dataclass(frozen=True)
class Cone:
    """cone(generators), optionally restricted to a union of open faces.

    ``faces`` lists generator-index sets; the cone is then the union of the
    relative interiors of the faces of the closed cone spanned by those
    generators.  The empty set stands for the apex.  ``None`` means closed.
    """

    generators: tuple
    faces: tuple | None = None
    dim: int = field(init=False)
    basis_flag: bool = field(init=False)

    def __post_init__(self):
        gens = [nx.vector(g) for g in self.generators]
        if not gens:
            raise EmptyInput("a cone needs at least one generator")
        d = nx.common_dim(gens)
        canon: list = []
        for g in gens:
            r = ray_canonical(g)
            if r not in canon:
                canon.append(r)
        object.__setattr__(self, "generators", tuple(canon))
        object.__setattr__(self, "dim", d)
        object.__setattr__(self, "basis_flag", nx.rank(canon) == len(canon))
        if self.faces is not None:
            if len(canon) != len(gens):
                raise InputError("generators of a face-restricted cone must be distinct rays")
            faces = tuple(sorted({frozenset(f) for f in self.faces}, key=lambda f: (len(f), sorted(f))))
            object.__setattr__(self, "faces", faces)
            self._validate_faces()

    # -- structure ---------------------------------------------------------

    @property
    def is_closed(self) -> bool:
        return self.faces is None

    @cached_property
    def closure(self) -> "Cone":
        return self if self.faces is None else Cone(self.generators)

    @cached_property
    def span_equations(self) -> list[Vector]:
        """Basis of the linear forms vanishing on the span of the generators."""
        return nx.nullspace(list(self.generators), self.dim)

    @cached_property
    def facets(self) -> tuple:
        """Inner normals n of the facets, so the closed cone is {n.x >= 0} within its span.

        Brute force over subsets of generators of size dim(span) - 1.
        """
        gens = list(self.generators)
        k = nx.rank(gens)
        span = nx.rref(gens)[0]
        normals: list = []
        for sub in combinations(range(len(gens)), k - 1):
            rows = [[nx.dot(gens[i], b) for b in span] for i in sub]
            null = nx.nullspace(rows, k) if rows else [nx.unit(k, i) for i in range(k)]
            if len(null) != 1:
                continue
            n = nx.combine(null[0], span)
            vals = [nx.dot(n, g) for g in gens]
            if all(v >= 0 for v in vals):
                pass
            elif all(v <= 0 for v in vals):
                n = nx.scale(-ONE, n)
            else:
                continue
            n = ray_canonical(n)
            if n not in normals:
                normals.append(n)
        return tuple(sorted(normals))

    def in_closure(self, x: Sequence) -> bool:
        x = self._point(x)
        if any(nx.dot(e, x) != 0 for e in self.span_equations):
            return False
        if self.faces is not None:
            return all(nx.dot(n, x) >= 0 for n in self.facets)
        return self._closure_lp(x).feasible

    def _closure_lp(self, x: Vector):
        n = len(self.generators)
        eqs = tuple((tuple(g[k] for g in self.generators), x[k]) for k in range(self.dim))
        return nx.solve_feasibility(LinearProgram(n, eqs, (), frozenset(range(n))))

    @cached_property
    def _face_cache(self) -> dict:
        return {}

    def face_of(self, x: Sequence) -> frozenset:
        """Generator indices of the smallest face of the closure containing x."""
        x = self._point(x)
        cache = self._face_cache
        face = cache.get(x)
        if face is None:
            tight = [n for n in self.facets if nx.dot(n, x) == 0]
            face = frozenset(
                i for i, g in enumerate(self.generators) if all(nx.dot(n, g) == 0 for n in tight)
            )
            if len(cache) < 100_000:
                cache[x] = face
        return face

    def _validate_faces(self) -> None:
        for f in self.faces:
            if any(not 0 <= i < len(self.generators) for i in f):
                raise InputError(f"face {sorted(f)} refers to a missing generator")
            if self.face_of(self._face_point(f)) != f:
                raise InputError(f"generator set {sorted(f)} is not a face")
        if frozenset() not in self.faces:
            raise InputError("a cone must contain its apex (the empty face)")
        for f, g in combinations(self.faces, 2):
            if self.face_of(self._face_point(f | g)) not in self.faces:
                raise InputError(f"faces {sorted(f)} and {sorted(g)} sum outside the cone")

    def _face_point(self, face: Iterable[int]) -> Vector:
        acc = nx.zeros(self.dim)
        for i in face:
            acc = nx.add(acc, self.generators[i])
        return acc

    def _point(self, x) -> Vector:
        x = nx.vector(x)
        if len(x) != self.dim:
            raise MixedDimensions(f"point of dimension {len(x)} for a cone in dimension {self.dim}")
        return x

    def contains(self, x: Sequence) -> bool:
        x = self._point(x)
        if not self.in_closure(x):
            return False
        return self.faces is None or self.face_of(x) in self.faces

    __contains__ = contains

    @cached_property
    def is_pointed(self) -> bool:
        """True when no nonzero nonnegative combination of generators vanishes."""
        n = len(self.generators)
        eqs = [(tuple(g[k] for g in self.generators), ZERO) for k in range(self.dim)]
        eqs.append(((ONE,) * n, ONE))
        return not nx.solve_feasibility(LinearProgram(n, tuple(eqs), (), frozenset(range(n)))).feasible

    @cached_property
    def irredundant_indices(self) -> tuple:
        """Indices of generators that are not nonnegative combinations of the others."""
        keep = list(range(len(self.generators)))
        for i in range(len(self.generators)):
            others = [self.generators[j] for j in keep if j != i]
            if not others:
                continue
            n = len(others)
            g = self.generators[i]
            eqs = tuple((tuple(o[k] for o in others), g[k]) for k in range(self.dim))
            if nx.solve_feasibility(LinearProgram(n, eqs, (), frozenset(range(n)))).feasible:
                keep.remove(i)
        return tuple(keep)

    def irredundant(self) -> "Cone":
        return Cone(tuple(self.generators[i] for i in self.irredundant_indices))

    @property
    def has_cone_basis(self) -> bool:
        """True when the irredundant generators are linearly independent."""
        gens = [self.generators[i] for i in self.irredundant_indices]
        return nx.rank(gens) == len(gens)

    def cone_basis(self) -> "Cone":
        if self.basis_flag:
            return self
        if not self.has_cone_basis:
            raise NoConeBasis("the irredundant generators are linearly dependent")
        return self.irredundant()

    def random_point(self, rng: random.Random, face: Iterable[int] | None = None, den: int = 8) -> Vector:
        """Random point of the relative interior of a face (default: the whole cone)."""
        idx = range(len(self.generators)) if face is None else sorted(face)
        coeffs = [Fraction(rng.randint(1, 4 * den), den) for _ in idx]
        acc = nx.zeros(self.dim)
        for c, i in zip(coeffs, idx):
            acc = nx.add(acc, nx.scale(c, self.generators[i]))
        return acc

    def random_domain_point(self, rng: random.Random, den: int = 8) -> Vector:
        if self.faces is None:
            return self.random_point(rng, den=den)
        return self.random_point(rng, rng.choice(self.faces), den=den)


def membership(C: Cone, x: Sequence) -> bool:
    return C.contains(x)


def coords(C: Cone, x: Sequence) -> Vector:
    """Unique nonnegative coordinates of x over a cone-basis."""
    if not C.basis_flag:
        raise NoConeBasis("generators are linearly dependent")
    x = C._point(x)
    cols = [tuple(g[k] for g in C.generators) for k in range(C.dim)]
    alpha = nx.solve(cols, x)
    if alpha is None or any(a < 0 for a in alpha):
        raise NotInCone(f"point {x} is not in the cone")
    if C.faces is not None and C.face_of(x) not in C.faces:
        raise NotInCone(f"point {x} is in the closure but not in the cone")
    return alpha


def has_rdp(C: Cone) -> bool:
    """Riesz decomposition property: in finite dimension, a simplicial closed cone."""
    if not C.is_pointed:
        raise NotPointed("the cone contains a line")
    return C.has_cone_basis


# --- interpolation ----------------------------------------------------------


@dataclass(frozen=True)
class PrunedBranch:
    """A partial assignment of open faces to grid cells shown to be infeasible."""

    assignment: tuple
    program: LinearProgram
    strict: frozenset
    certificate: Certificate

    def verify(self) -> bool:
        return self.certificate.verify(self.program, self.strict)


@dataclass(frozen=True)
class RieszResult:
    """Outcome of :func:`riesz_interpolate`.

    On success ``grid[j][k]`` is z_jk.  On failure ``branches`` holds one
    infeasibility certificate per pruned branch of the face-assignment
    search; for closed cones that is a single branch with an empty
    assignment.  :meth:`verify` re-checks everything without the solver.
    """

    feasible: bool
    grid: tuple | None
    method: str
    xs: tuple
    ys: tuple
    cone: Cone
    branches: tuple = ()

    def verify(self) -> bool:
        C = self.cone
        if self.feasible:
            for j, x in enumerate(self.xs):
                if _sum(self.grid[j], C.dim) != x:
                    return False
            for k, y in enumerate(self.ys):
                if _sum([row[k] for row in self.grid], C.dim) != y:
                    return False
            return all(C.contains(z) for row in self.grid for z in row)
        if not all(b.verify() for b in self.branches):
            return False
        cells = len(self.xs) * len(self.ys)
        faces = C.faces if C.faces is not None else None
        pruned = {b.assignment for b in self.branches}

        def covered(prefix: tuple) -> bool:
            if prefix in pruned:
                return True
            if faces is None or len(prefix) == cells:
                return False
            return all(covered(prefix + (f,)) for f in faces)

        return covered(())


def _sum(vectors, d) -> Vector:
    acc = nx.zeros(d)
    for v in vectors:
        acc = nx.add(acc, v)
    return acc


def _grid_program(C: Cone, xs, ys, assignment):
    """Grid system with cells (j, k) in row-major order; assigned cells sit in open faces."""
    gens = C.generators
    n, d = len(gens), C.dim
    m, p = len(xs), len(ys)
    nv = m * p * n

    def var(j, k, g):
        return ((j * p) + k) * n + g

    eqs, ineqs, strict = [], [], []
    for j in range(m):
        for c in range(d):
            row = [ZERO] * nv
            for k in range(p):
                for g in range(n):
                    row[var(j, k, g)] = gens[g][c]
            eqs.append((tuple(row), xs[j][c]))
    for k in range(p):
        for c in range(d):
            row = [ZERO] * nv
            for j in range(m):
                for g in range(n):
                    row[var(j, k, g)] = gens[g][c]
            eqs.append((tuple(row), ys[k][c]))
    for cell, face in enumerate(assignment):
        j, k = divmod(cell, p)
        for g in range(n):
            row = [ZERO] * nv
            row[var(j, k, g)] = ONE
            if g in face:
                strict.append(len(ineqs))
                ineqs.append((tuple(row), ZERO))
            else:
                eqs.append((tuple(row), ZERO))
    lp = LinearProgram(nv, tuple(eqs), tuple(ineqs), frozenset(range(nv)))
    return lp, frozenset(strict)


def _grid_from(C: Cone, x, m, p):
    n = len(C.generators)
    return tuple(
        tuple(nx.combine(x[((j * p) + k) * n : ((j * p) + k + 1) * n], C.generators) for k in range(p))
        for j in range(m)
    )


def riesz_interpolate(C: Cone, xs: Sequence[Sequence], ys: Sequence[Sequence]) -> RieszResult:
    """Find z_jk in C with row sums xs and column sums ys, or certify there is none."""
    xs = tuple(C._point(x) for x in xs)
    ys = tuple(C._point(y) for y in ys)
    if not xs or not ys:
        raise EmptyInput("need at least one x and one y")
    if _sum(xs, C.dim) != _sum(ys, C.dim):
        raise SumMismatch("sum of xs differs from sum of ys")
    for v in xs + ys:
        if not C.contains(v):
            raise NotInCone(f"point {v} is not in the cone")
    m, p = len(xs), len(ys)
    if C.is_closed and C.basis_flag:
        ax = [coords(C, x) for x in xs]
        ay = [coords(C, y) for y in ys]
        az = coords(C, _sum(xs, C.dim))
        grid = []
        for j in range(m):
            row = []
            for k in range(p):
                w = [ax[j][b] * ay[k][b] / az[b] if az[b] else ZERO for b in range(len(az))]
                row.append(nx.combine(w, C.generators))
            grid.append(tuple(row))
        return RieszResult(True, tuple(grid), "closed-form", xs, ys, C)
    if C.is_closed:
        lp, strict = _grid_program(C, xs, ys, ())
        res = nx.solve_feasibility(lp)
        if res.feasible:
            return RieszResult(True, _grid_from(C, res.x, m, p), "linear-program", xs, ys, C)
        return RieszResult(False, None, "linear-program", xs, ys, C, (PrunedBranch((), lp, strict, res.certificate),))

    branches: list[PrunedBranch] = []
    cells = m * p

    def search(prefix: tuple):
        lp, strict = _grid_program(C, xs, ys, prefix)
        res = nx.solve_feasibility(lp, strict)
        if not res.feasible:
            branches.append(PrunedBranch(prefix, lp, strict, res.certificate))
            return None
        if len(prefix) == cells:
            return res.x
        for face in C.faces:
            found = search(prefix + (face,))
            if found is not None:
                return found
        return None

    x = search(())
    if x is not None:
        return RieszResult(True, _grid_from(C, x, m, p), "face-search", xs, ys, C)
    return RieszResult(False, None, "face-search", xs, ys, C, tuple(branches))


# --- order intervals, suspensions and bases ------------------------------------


def order_interval(C: Cone, x: Sequence) -> Polytope:
    """[0, x] = {y in C : x - y in C} for the closure of C, by facet description."""
    x = C._point(x)
    if C.dim > ORDER_INTERVAL_MAX_DIM:
        raise DimensionBudget(f"order intervals are limited to dimension {ORDER_INTERVAL_MAX_DIM}")
    if not C.is_pointed:
        raise NotPointed("the cone contains a line")
    if not C.in_closure(x):
        raise NotInCone(f"point {x} is not in the cone")
    d = C.dim
    eqs = tuple((e, ZERO) for e in C.span_equations)
    ineqs = []
    for n in C.facets:
        ineqs.append((n, ZERO))
        ineqs.append((nx.scale(-ONE, n), -nx.dot(n, x)))
    lp = LinearProgram(d, eqs, tuple(ineqs), frozenset())
    return ImplicitPolytope(lp, nx.identity(d), nx.zeros(d)).to_polytope()


@dataclass(frozen=True)
class Suspension:
    """The cone {(t, t*x) : t >= 0, x in base}."""

    base: Polytope

    @property
    def ambient_dim(self) -> int:
        return self.base.dim + 1

    @cached_property
    def cone(self) -> Cone:
        return Cone(tuple((ONE,) + v for v in self.base.vertices))

    def lift(self, x: Sequence) -> Vector:
        return (ONE,) + nx.vector(x)


def suspend(K: Polytope) -> Suspension:
    return Suspension(K)


def base_functional(C: Cone) -> Vector:
    """A functional positive on every generator.

    Coordinate functionals are tried first, then the coordinate sum, then a
    linear program; the first success wins, so the choice is deterministic.
    """
    if not C.is_pointed:
        raise NoBase("a cone containing a line has no base")
    d = C.dim
    for g in [nx.unit(d, i) for i in range(d)] + [(ONE,) * d]:
        if all(nx.dot(g, v) > 0 for v in C.generators):
            return g
    lp = LinearProgram(d, (), tuple((v, ONE) for v in C.generators), frozenset())
    res = nx.solve_feasibility(lp)
    if not res.feasible:
        raise NoBase("no functional is positive on all generators")
    return res.x


def base_of(C: Cone) -> Polytope:
    """Cross-section {x in closure(C) : g(x) = 1} for the functional of :func:`base_functional`."""
    g = base_functional(C)
    return canonicalize([nx.scale(1 / nx.dot(g, v), v) for v in C.generators])
