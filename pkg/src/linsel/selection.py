"""Tomographical coordinates and single-valued selections.

A point z of a polytope K is addressed by an ordered list of functionals
f_1, ..., f_m.  With K_0 = K and [L_j, R_j] the range of f_j on K_{j-1},

    theta_j = (f_j(z) - L_j) / (R_j - L_j)     (0/0 read as 0)
    K_j     = K_{j-1} intersected with {f_j = f_j(z)}.

When the functionals have full rank the last section is the single point z,
so the thetas determine z.  Applying the same thetas to the values A(x') of a
linear map A gives a selection through the chosen graph point.

Sections are taken on implicit polytopes (projections of LP feasible sets),
so no vertex enumeration happens along the chain.
"""

from __future__ import annotations

import logging
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import numerics as nx
from .cone import Cone, coords
from .errors import (
    ArityMismatch,
    ChoiceOutsideValue,
    DomainError,
    EmptyInput,
    InfeasibleSplit,
    InputError,
    MixedDimensions,
    NoSelection,
    NotExhaustive,
    NotInDomain,
    NotLinear,
    NotSimplex,
    PointNotInValue,
    PointOutside,
)
from .numerics import ONE, ZERO, LinearProgram, Vector
from .polytope import (
    Functional,
    ImplicitPolytope,
    Polytope,
    as_functional,
    barycentric_coordinates,
    canonicalize,
    implicit_product,
    is_simplex,
    section,
    with_linear_equations,
)
from .svmap import (
    BasisLinear,
    DecompositionSubmap,
    SetValuedMap,
    check_linear,
    greatest_linear_submap,
)

log = logging.getLogger(__name__)

HALF = Fraction(1, 2)


# --- functionals and coordinates ------------------------------------------------


@dataclass(frozen=True)
class FunctionalSet:
    """An ordered, exhaustive list of linear functionals on R^dim."""

    functionals: tuple
    dim: int = field(init=False)

    def __post_init__(self):
        fs = tuple(as_functional(f) for f in self.functionals)
        if not fs:
            raise NotExhaustive("an exhaustive functional set cannot be empty")
        dims = {f.dim for f in fs}
        if len(dims) != 1:
            raise MixedDimensions("functionals of different dimensions")
        d = dims.pop()
        if nx.rank([f.coeffs for f in fs]) != d:
            raise NotExhaustive(f"functionals do not separate points of R^{d}")
        object.__setattr__(self, "functionals", fs)
        object.__setattr__(self, "dim", d)

    @classmethod
    def coordinates(cls, d: int, order: Sequence[int] | None = None) -> "FunctionalSet":
        """Coordinate functionals, in the given order (default 0..d-1)."""
        order = list(range(d)) if order is None else [int(i) for i in order]
        if sorted(order) != list(range(d)):
            raise NotExhaustive(f"order {order} is not a permutation of 0..{d - 1}")
        return cls(tuple(Functional.coordinate(d, i) for i in order))

    def __len__(self):
        return len(self.functionals)

    def __iter__(self):
        return iter(self.functionals)

    def blockwise(self, blocks: int) -> "FunctionalSet":
        """The same functionals on a product of ``blocks`` copies, functional-major."""
        d, n = self.dim, self.dim * blocks
        out = []
        for f in self.functionals:
            for b in range(blocks):
                c = [ZERO] * n
                c[b * d : (b + 1) * d] = f.coeffs
                out.append(Functional(tuple(c)))
        return FunctionalSet(tuple(out))

    def as_lists(self) -> list:
        return [[nx.format_rational(c) for c in f.coeffs] for f in self.functionals]


@dataclass(frozen=True)
class TomoCoords:
    thetas: tuple

    def __post_init__(self):
        ts = tuple(nx.to_rational(t) for t in self.thetas)
        if any(t < 0 or t > 1 for t in ts):
            raise InputError(f"tomographical coordinates must lie in [0, 1]: {ts}")
        object.__setattr__(self, "thetas", ts)

    @classmethod
    def constant(cls, value, n: int) -> "TomoCoords":
        return cls((nx.to_rational(value),) * n)

    def __len__(self):
        return len(self.thetas)

    def repeated(self, blocks: int) -> "TomoCoords":
        return TomoCoords(tuple(t for t in self.thetas for _ in range(blocks)))

    def as_list(self) -> list:
        return [nx.format_rational(t) for t in self.thetas]


def _functionals(D, dim: int) -> FunctionalSet:
    D = FunctionalSet.coordinates(dim) if D is None else D
    if not isinstance(D, FunctionalSet):
        D = FunctionalSet(tuple(D))
    if D.dim != dim:
        raise MixedDimensions(f"functionals on R^{D.dim} for a set in R^{dim}")
    return D


def tomo_coords(z: Sequence, K, D: FunctionalSet | None = None) -> TomoCoords:
    """Tomographical coordinates of z in K under the functional order D."""
    P = ImplicitPolytope.of(K)
    z = nx.vector(z)
    D = _functionals(D, P.dim)
    if len(z) != P.dim:
        raise MixedDimensions("point and polytope dimensions differ")
    if not P.contains(z):
        raise PointOutside(f"point {z} is not in the polytope")
    thetas = []
    for f in D:
        lo, hi = P.support(f)
        level = f(z)
        thetas.append(ZERO if hi == lo else (level - lo) / (hi - lo))
        P = P.with_level(f, level)
    return TomoCoords(tuple(thetas))


def tomo_reconstruct(K, theta: TomoCoords | Sequence, D: FunctionalSet | None = None) -> Vector:
    """The point of K with the given tomographical coordinates."""
    P = ImplicitPolytope.of(K)
    D = _functionals(D, P.dim)
    theta = theta if isinstance(theta, TomoCoords) else TomoCoords(tuple(theta))
    if len(theta) != len(D):
        raise ArityMismatch(f"{len(theta)} coordinates for {len(D)} functionals")
    for f, t in zip(D, theta.thetas):
        lo, hi = P.support(f)
        P = P.with_level(f, lo + t * (hi - lo))
    point = P.find_point()
    if point is None:
        raise EmptyInput("reconstruction ended in an empty section")
    return point


# --- section maps ---------------------------------------------------------------


class SectionMap(SetValuedMap):
    """x -> section(T(x), f, theta), evaluated on demand."""

    def __init__(self, T: SetValuedMap, f, theta):
        self.T = T
        self.f = as_functional(f)
        self.theta = nx.to_rational(theta)
        self.domain = T.domain
        self.space = T.space

    def evaluate(self, x: Sequence) -> Polytope:
        return section(self.T.evaluate(x), self.f, self.theta)

    def __repr__(self):
        return f"SectionMap(theta={self.theta})"


def section_map(T: SetValuedMap, f, theta, trials: int = 50, seed: int = 0) -> SetValuedMap:
    """The theta-section of T along f.

    For a :class:`BasisLinear` T the generator-wise sections give a candidate
    linear map.  It is returned when it agrees with the pointwise sections on
    ``trials`` random domain points.  Otherwise the lazy map is returned.
    """
    lazy = SectionMap(T, f, theta)
    if not isinstance(T, BasisLinear) or T.space.is_boolean:
        return lazy
    candidate = BasisLinear(T.domain, [section(v, lazy.f, lazy.theta) for v in T.values])
    rng = random.Random(seed)
    probes = list(T.domain.generators) + [nx.add(u, v) for u in T.domain.generators for v in T.domain.generators]
    probes += [T.domain.random_point(rng) for _ in range(trials)]
    for x in probes:
        if candidate.evaluate(x) != lazy.evaluate(x):
            log.info("sections do not commute with the basis sums at %s; returning a lazy map", x)
            return lazy
    return candidate


# --- selections -----------------------------------------------------------------


class Selection(ABC):
    """A single-valued map."""

    kind: str

    @abstractmethod
    def evaluate(self, z: Sequence) -> Vector:
        ...

    def __call__(self, z: Sequence) -> Vector:
        return self.evaluate(z)


class BasisTableSelection(Selection):
    """Linear map given by a point per cone-basis generator.

    ``route`` records how the table was built: ``"tomographic"`` when the
    generator-wise reconstructions already sum to the prescribed value, or
    ``"fiber"`` when they were chosen jointly inside the fiber over it.
    """

    kind = "basis-table"

    def __init__(self, domain: Cone, table: Sequence, route: str = "given", thetas=None, functionals=None):
        self.domain = domain
        self.table = tuple(nx.vector(t) for t in table)
        self.route = route
        self.thetas = thetas
        self.functionals = functionals

    def evaluate(self, z: Sequence) -> Vector:
        try:
            alpha = coords(self.domain, nx.vector(z))
        except DomainError as exc:
            raise NotInDomain(str(exc)) from None
        return nx.combine(alpha, self.table)

    def __repr__(self):
        return f"BasisTableSelection(route={self.route}, table={self.table})"


class TomographicSelection(Selection):
    """z -> tomo_reconstruct(A(z), thetas, D), evaluated on demand."""

    kind = "tomo"

    def __init__(self, source: SetValuedMap, thetas: TomoCoords, functionals: FunctionalSet):
        self.source = source
        self.domain = source.domain
        self.thetas = thetas
        self.functionals = functionals

    def evaluate(self, z: Sequence) -> Vector:
        return tomo_reconstruct(self.source.evaluate_implicit(z), self.thetas, self.functionals)

    def __repr__(self):
        return f"TomographicSelection(thetas={self.thetas.thetas})"


class BarycentricSelection(Selection):
    """p -> sum_i lambda_i(p) c_i on a simplex, with c_i attached to vertex i."""

    kind = "barycentric"

    def __init__(self, simplex: Polytope, choices: Sequence):
        self.domain = simplex
        self.choices = tuple(nx.vector(c) for c in choices)

    def evaluate(self, p: Sequence) -> Vector:
        return nx.combine(barycentric_coordinates(self.domain, p), self.choices)

    def __repr__(self):
        return f"BarycentricSelection(choices={self.choices})"


class AffineSelection(Selection):
    """Restriction of a linear selection on a suspension to the slice {1} x K."""

    def __init__(self, linear: Selection, base: Polytope):
        self.linear = linear
        self.domain = base
        self.kind = linear.kind

    def evaluate(self, p: Sequence) -> Vector:
        return self.linear.evaluate((ONE,) + nx.vector(p))

    def __repr__(self):
        return f"AffineSelection({self.linear!r})"


# --- linear selections through a graph point -------------------------------------


def _as_basis_linear(A: SetValuedMap, verify: bool, trials: int, seed: int):
    if isinstance(A, BasisLinear):
        return A
    if verify:
        res = check_linear(A, trials, seed)
        if not res:
            raise NotLinear(f"linearity refuted at x={res.x}, y={res.y} ({res.reason})")
    dom = A.domain
    if dom.is_closed and dom.has_cone_basis:
        basis = dom.cone_basis()
        return BasisLinear(basis, [A.evaluate(b) for b in basis.generators])
    return None


def _fiber_table(A: BasisLinear, alpha: Vector, y: Vector, theta: TomoCoords, D: FunctionalSet) -> dict:
    """Points a_b in A(b), for alpha_b > 0, with sum alpha_b a_b = y, chosen tomographically."""
    active = [i for i, a in enumerate(alpha) if a]
    d = D.dim
    P = implicit_product([A.values[i] for i in active])
    n = d * len(active)
    rows = []
    for k in range(d):
        a = [ZERO] * n
        for slot, i in enumerate(active):
            a[slot * d + k] = alpha[i]
        rows.append((tuple(a), y[k]))
    P = with_linear_equations(P, rows)
    point = tomo_reconstruct(P, theta.repeated(len(active)), D.blockwise(len(active)))
    return {i: point[slot * d : (slot + 1) * d] for slot, i in enumerate(active)}


def linear_selection_through(
    A: SetValuedMap,
    x: Sequence,
    y: Sequence,
    D: FunctionalSet | None = None,
    verify: bool = True,
    check_trials: int = 50,
    seed: int = 0,
) -> Selection:
    """A linear selection a of A with a(x) = y.

    The thetas of y in A(x) are transported to the value of every cone-basis
    generator.  If those points do not add up to y (sections need not commute
    with Minkowski sums) the generators with positive weight are resolved
    jointly in the fiber {(a_b) : a_b in A(b), sum alpha_b a_b = y}, with the
    same thetas repeated per generator.  Either way the result is linear, lies
    in A and passes through (x, y).

    Maps that are not :class:`BasisLinear` are first checked for linearity
    (unless ``verify`` is false).  Without a cone-basis the lazy tomographical
    selection is returned; it passes through (x, y) but is linear only when A
    is.
    """
    x, y = nx.vector(x), nx.vector(y)
    if A.space.is_boolean:
        raise InputError("selections need polytope values")
    value = A.evaluate_implicit(x)
    if len(y) != value.dim:
        raise MixedDimensions("y lives in a different space than the values")
    D = _functionals(D, value.dim)
    if not value.contains(y):
        raise PointNotInValue(f"{y} is not in A({x})")
    log.info("functional order: %s", D.as_lists())
    theta = tomo_coords(y, value, D)
    B = _as_basis_linear(A, verify, check_trials, seed)
    if B is None:
        return TomographicSelection(A, theta, D)
    alpha = B.coords(x)
    table = [tomo_reconstruct(v, theta, D) for v in B.values]
    route = "tomographic"
    if nx.combine(alpha, table) != y:
        route = "fiber"
        for i, point in _fiber_table(B, alpha, y, theta, D).items():
            table[i] = point
    log.info("selection route: %s", route)
    return BasisTableSelection(B.domain, table, route, theta, D)


def tomographic_selection(A: SetValuedMap, x: Sequence, y: Sequence, D: FunctionalSet | None = None) -> TomographicSelection:
    """z -> tomo_reconstruct(A(z), tomo_coords(y, A(x)), D), with no linearity assumed."""
    x, y = nx.vector(x), nx.vector(y)
    value = A.evaluate_implicit(x)
    D = _functionals(D, value.dim)
    if not value.contains(y):
        raise PointNotInValue(f"{y} is not in A({x})")
    return TomographicSelection(A, tomo_coords(y, value, D), D)


# --- existence ------------------------------------------------------------------


@dataclass(frozen=True)
class Existence:
    """Answer of :func:`selection_exists_through`.

    ``answer`` is ``"yes"``, ``"no"`` or ``"unknown"``.  A ``"no"`` carries a
    decomposition x = p_1 + ... + p_k with y outside T(p_1) + ... + T(p_k); a
    ``"yes"`` carries a selection.
    """

    answer: str
    witness: tuple | None = None
    selection: Selection | None = None
    depth: int | None = None

    def __bool__(self):
        return self.answer == "yes"


def selection_exists_through(
    T: SetValuedMap, x: Sequence, y: Sequence, depth: int = 2, trials: int = 0, seed: int = 0, D=None
) -> Existence:
    """Is there a linear selection of the superlinear map T through (x, y)?"""
    x, y = nx.vector(x), nx.vector(y)
    if T.space.is_boolean:
        raise InputError("selections need polytope values")
    if not T.evaluate_implicit(x).contains(y):
        raise PointNotInValue(f"{y} is not in T({x})")
    dom = T.domain
    if dom.is_closed and dom.has_cone_basis:
        basis = dom.cone_basis()
        S = T if isinstance(T, BasisLinear) else BasisLinear(basis, [T.evaluate(b) for b in basis.generators])
        alpha = S.coords(x)
        if S.evaluate_implicit(x).contains(y):
            return Existence("yes", selection=linear_selection_through(S, x, y, D))
        parts = tuple(nx.scale(a, b) for a, b in zip(alpha, S.domain.generators) if a)
        return Existence("no", witness=parts)
    value, parts = DecompositionSubmap(T, depth, trials, seed).evaluate_with_witness(x)
    if not ImplicitPolytope.of(value).contains(y):
        return Existence("no", witness=tuple(parts), depth=depth)
    return Existence("unknown", depth=depth)


# --- affine selections ----------------------------------------------------------


def _base_of_suspension(T: SetValuedMap) -> Polytope:
    gens = T.domain.generators
    if any(g[0] <= 0 for g in gens):
        raise InputError("the map is not given on a suspension (first coordinate must be positive)")
    return canonicalize([nx.scale(1 / g[0], g[1:]) for g in gens])


def affine_selection_through(
    T: SetValuedMap, x: Sequence, y: Sequence, D: FunctionalSet | None = None, depth: int = 2
) -> AffineSelection:
    """An affine selection of the convex map T through (x, y).

    T is given on the suspension of K, i.e. T((1, p)) is the value at p in K.
    A selection exists exactly when y lies in the greatest affine submap at x;
    on simplexes that submap is read off the vertices.
    """
    x, y = nx.vector(x), nx.vector(y)
    K = _base_of_suspension(T)
    X = (ONE,) + x
    if not T.evaluate_implicit(X).contains(y):
        raise PointNotInValue(f"{y} is not in T({x})")
    rep = greatest_linear_submap(T, depth=depth)
    if not rep.exact:
        value, parts = rep.map.evaluate_with_witness(X)
        if not ImplicitPolytope.of(value).contains(y):
            raise NoSelection(f"{y} is outside the decomposition bound at {x} (witness {parts})")
        raise DomainError("base is not a simplex; affine selections are only decided on simplexes")
    S = rep.map
    if not S.evaluate_implicit(X).contains(y):
        raise NoSelection(f"{y} is outside the greatest affine submap at {x}")
    return AffineSelection(linear_selection_through(S, X, y, D), K)


def barycentric_selection(K: Polytope, choices: Sequence, T: SetValuedMap | None = None) -> BarycentricSelection:
    """Affine interpolation of one choice per vertex of the simplex K.

    ``choices`` follow the order of ``K.vertices``.  When T is given (on the
    suspension of K, or directly on K) each choice is checked against T.
    """
    if not is_simplex(K):
        raise NotSimplex("barycentric selections need a simplex")
    if len(choices) != len(K.vertices):
        raise ArityMismatch(f"{len(choices)} choices for {len(K.vertices)} vertices")
    choices = [nx.vector(c) for c in choices]
    if T is not None:
        lift = T.domain.dim == K.dim + 1
        for v, c in zip(K.vertices, choices):
            value = T.evaluate_implicit((ONE,) + v if lift else v)
            if not value.contains(c):
                raise ChoiceOutsideValue(f"choice {c} is not in T({v})")
    return BarycentricSelection(K, choices)


# --- nesting bases --------------------------------------------------------------


@dataclass(frozen=True)
class NestingBasis:
    """A full binary tree of vectors, each node the sum of its two children.

    ``levels[n][k]`` is b_{n,k}.
    """

    levels: tuple

    def __post_init__(self):
        levels = tuple(tuple(nx.vector(v) for v in row) for row in self.levels)
        if not levels:
            raise EmptyInput("a nesting basis needs at least the root")
        for n, row in enumerate(levels):
            if len(row) != 2**n:
                raise InputError(f"level {n} has {len(row)} nodes, expected {2 ** n}")
        nx.common_dim([v for row in levels for v in row])
        for n in range(len(levels) - 1):
            for k, v in enumerate(levels[n]):
                if nx.add(levels[n + 1][2 * k], levels[n + 1][2 * k + 1]) != v:
                    raise InputError(f"node ({n},{k}) is not the sum of its children")
        seen = {}
        for n, row in enumerate(levels):
            for k, v in enumerate(row):
                if any(v) and v in seen:
                    raise InputError(f"nodes {seen[v]} and {(n, k)} coincide")
                seen.setdefault(v, (n, k))
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_leaves(cls, leaves: Sequence) -> "NestingBasis":
        row = [nx.vector(v) for v in leaves]
        depth = len(row).bit_length() - 1
        if not row or 2**depth != len(row):
            raise InputError("the number of leaves must be a power of two")
        levels = [row]
        while len(row) > 1:
            row = [nx.add(row[2 * k], row[2 * k + 1]) for k in range(len(row) // 2)]
            levels.append(row)
        return cls(tuple(reversed(levels)))

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def dim(self) -> int:
        return len(self.levels[0][0])

    def node(self, n: int, k: int) -> Vector:
        return self.levels[n][k]

    @property
    def leaves(self) -> tuple:
        return self.levels[-1]


class NestingSelection(Selection):
    """Values S(b_{n,k}) on a nesting basis, extended to nonnegative combinations of leaves."""

    kind = "nesting"

    def __init__(self, basis: NestingBasis, values: dict, split_rule: str):
        self.basis = basis
        self.values = dict(values)
        self.split_rule = split_rule

    def node_value(self, n: int, k: int) -> Vector:
        return self.values[(n, k)]

    def evaluate(self, z: Sequence) -> Vector:
        z = nx.vector(z)
        leaves = self.basis.leaves
        cols = [tuple(v[i] for v in leaves) for i in range(len(z))]
        res = nx.solve_feasibility(LinearProgram.build(len(leaves), eq=list(zip(cols, z))))
        if not res.feasible:
            raise NotInDomain(f"{z} is not a nonnegative combination of the leaves")
        d = self.basis.depth
        return nx.combine(res.x, [self.values[(d, k)] for k in range(len(leaves))])


def _value_of(T, b) -> ImplicitPolytope:
    if isinstance(T, SetValuedMap):
        return T.evaluate_implicit(b)
    return ImplicitPolytope.of(T(b))


def nesting_selection(B: NestingBasis, T, y0: Sequence, split_rule: str = "leftmost") -> NestingSelection:
    """Split y0 down the tree, S(parent) = S(left) + S(right) with S(b) in T(b).

    ``split_rule`` picks the pair (g, h) in the feasible split set: its
    tomographical point with all thetas 0 (``"leftmost"``) or 1/2
    (``"midpoint"``), under coordinate order on (g, h).
    """
    if split_rule not in ("leftmost", "midpoint"):
        raise InputError(f"unknown split rule {split_rule!r}")
    t = ZERO if split_rule == "leftmost" else HALF
    y0 = nx.vector(y0)
    if not _value_of(T, B.node(0, 0)).contains(y0):
        raise PointNotInValue(f"{y0} is not in T(b_0,0)")
    d = len(y0)
    values = {(0, 0): y0}
    for n in range(B.depth):
        for k in range(2**n):
            s = values[(n, k)]
            P = implicit_product([_value_of(T, B.node(n + 1, 2 * k)), _value_of(T, B.node(n + 1, 2 * k + 1))])
            rows = [(tuple(ONE if j in (i, d + i) else ZERO for j in range(2 * d)), s[i]) for i in range(d)]
            P = with_linear_equations(P, rows)
            if P.is_empty():
                raise InfeasibleSplit(f"no split of {s} at node ({n},{k}); T is not linear on the tree")
            gh = tomo_reconstruct(P, TomoCoords.constant(t, 2 * d), FunctionalSet.coordinates(2 * d))
            values[(n + 1, 2 * k)] = gh[:d]
            values[(n + 1, 2 * k + 1)] = gh[d:]
    return NestingSelection(B, values, split_rule)
