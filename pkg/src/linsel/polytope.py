"""Convex polytopes in vertex representation.

A :class:`Polytope` always holds its irredundant vertex list in
lexicographic order, so two polytopes are equal exactly when their vertex
tuples are.  :class:`ImplicitPolytope` describes a polytope as the linear
image of the feasible region of a linear program; Minkowski sums,
intersections and sections stay cheap in that form, and every query on it is
a linear program.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence, Union

from . import numerics as nx
from .errors import ArityMismatch, EmptyInput, MixedDimensions, NonpositiveScalar, PointOutside
from .numerics import ONE, ZERO, LinearProgram, Vector

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Functional:
    """Linear functional p -> coeffs . p."""

    coeffs: Vector

    def __post_init__(self):
        object.__setattr__(self, "coeffs", nx.vector(self.coeffs))

    def __call__(self, p: Sequence) -> Fraction:
        if len(p) != len(self.coeffs):
            raise MixedDimensions(f"functional of dimension {len(self.coeffs)} applied to a point of dimension {len(p)}")
        return nx.dot(self.coeffs, p)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    @classmethod
    def coordinate(cls, d: int, i: int) -> "Functional":
        return cls(nx.unit(d, i))


def as_functional(f) -> Functional:
    return f if isinstance(f, Functional) else Functional(f)


class SupportInterval(NamedTuple):
    low: Fraction
    high: Fraction


class Polytope:
    """Nonempty convex polytope given by its canonical vertex list."""

    __slots__ = ("vertices", "dim")

    def __init__(self, points: Sequence[Sequence]):
        canon = canonicalize(points)
        self.vertices = canon.vertices
        self.dim = canon.dim

    @classmethod
    def _trusted(cls, vertices: tuple, dim: int) -> "Polytope":
        obj = object.__new__(cls)
        obj.vertices = vertices
        obj.dim = dim
        return obj

    @classmethod
    def point(cls, p: Sequence) -> "Polytope":
        v = nx.vector(p)
        return cls._trusted((v,), len(v))

    @classmethod
    def box(cls, lows: Sequence, highs: Sequence) -> "Polytope":
        from itertools import product

        return cls(list(product(*zip(nx.vector(lows), nx.vector(highs)))))

    def __eq__(self, other):
        return isinstance(other, Polytope) and self.vertices == other.vertices

    def __hash__(self):
        return hash(self.vertices)

    def __repr__(self):
        verts = ", ".join("(" + ", ".join(nx.format_rational(c) for c in v) + ")" for v in self.vertices)
        return f"Polytope([{verts}])"

    def __contains__(self, p) -> bool:
        return contains(self, p)

    def __add__(self, other: "Polytope") -> "Polytope":
        return minkowski_sum(self, other)

    def __rmul__(self, lam) -> "Polytope":
        return scale(self, lam)

    @property
    def is_singleton(self) -> bool:
        return len(self.vertices) == 1

    def as_lists(self) -> list[list[str]]:
        return [[nx.format_rational(c) for c in v] for v in self.vertices]


# --- hull -----------------------------------------------------------------


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _planar_hull(pts: list, axes: tuple[int, int]) -> list:
    """Strict hull vertices of coplanar points, via a monotone chain on two axes."""
    i, j = axes
    proj = sorted(((p[i], p[j]), p) for p in pts)
    lower: list = []
    for q in proj:
        while len(lower) >= 2 and _cross(lower[-2][0], lower[-1][0], q[0]) <= 0:
            lower.pop()
        lower.append(q)
    upper: list = []
    for q in reversed(proj):
        while len(upper) >= 2 and _cross(upper[-2][0], upper[-1][0], q[0]) <= 0:
            upper.pop()
        upper.append(q)
    return [p for _, p in lower[:-1] + upper[:-1]]


def _in_hull_of(p, others) -> bool:
    n = len(others)
    d = len(p)
    eqs = [((ONE,) * n, ONE)]
    for k in range(d):
        eqs.append((tuple(q[k] for q in others), p[k]))
    return nx.solve_feasibility(LinearProgram(n, tuple(eqs), (), frozenset(range(n)))).feasible


def _lp_prune(pts: list) -> list:
    """Drop every point that lies in the hull of the remaining ones."""
    survivors = list(pts)
    for p in pts:
        if p is pts[0] or p is pts[-1]:
            continue  # lexicographic extremes are always vertices
        others = [q for q in survivors if q is not p]
        if _in_hull_of(p, others):
            survivors = others
    return survivors


def extreme_points(points: Sequence[Vector]) -> list:
    """Sorted extreme points of a finite point set (duplicates removed)."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    base = pts[0]
    diffs = [nx.sub(p, base) for p in pts[1:]]
    red, piv = nx.rref(diffs)
    r = len(piv)
    if r == 0:
        return pts[:1]
    if r == 1:
        # along a line, lexicographic order is the order of the line parameter
        return [pts[0], pts[-1]]
    if r == 2:
        return sorted(_planar_hull(pts, (piv[0], piv[1])))
    return _lp_prune(pts)


def canonicalize(points: Sequence[Sequence]) -> Polytope:
    """conv(points) in canonical form."""
    pts = [nx.vector(p) for p in points]
    if not pts:
        raise EmptyInput("canonicalize needs at least one point")
    d = nx.common_dim(pts)
    return Polytope._trusted(tuple(extreme_points(pts)), d)


def _check_dim(K: Polytope, d: int) -> None:
    if K.dim != d:
        raise MixedDimensions(f"dimension {d} used with a polytope in dimension {K.dim}")


# --- basic operations -----------------------------------------------------


def support(K: Polytope, f) -> SupportInterval:
    f = as_functional(f)
    _check_dim(K, f.dim)
    vals = [f(v) for v in K.vertices]
    return SupportInterval(min(vals), max(vals))


def section(K: Polytope, f, theta) -> Polytope:
    """K intersected with the level set of f at fraction theta between L_f and R_f."""
    f = as_functional(f)
    theta = nx.to_rational(theta)
    if not 0 <= theta <= 1:
        raise ValueError("theta must lie in [0, 1]")
    low, high = support(K, f)
    if low == high:
        return K
    c = (1 - theta) * low + theta * high
    vals = [f(v) for v in K.vertices]
    cands = [v for v, fv in zip(K.vertices, vals) if fv == c]
    below = [(v, fv) for v, fv in zip(K.vertices, vals) if fv < c]
    above = [(v, fv) for v, fv in zip(K.vertices, vals) if fv > c]
    for u, fu in below:
        for w, fw in above:
            t = (c - fu) / (fw - fu)
            cands.append(tuple(a + t * (b - a) for a, b in zip(u, w)))
    return canonicalize(cands)


def minkowski_sum(A: Polytope, B: Polytope) -> Polytope:
    _check_dim(B, A.dim)
    if B.is_singleton:
        return translate(A, B.vertices[0])
    if A.is_singleton:
        return translate(B, A.vertices[0])
    return canonicalize([nx.add(a, b) for a in A.vertices for b in B.vertices])


def minkowski_sum_all(polys: Sequence[Polytope]) -> Polytope:
    if not polys:
        raise EmptyInput("empty Minkowski sum")
    acc = polys[0]
    for P in polys[1:]:
        acc = minkowski_sum(acc, P)
    return acc


def translate(K: Polytope, v: Sequence) -> Polytope:
    v = nx.vector(v)
    _check_dim(K, len(v))
    return Polytope._trusted(tuple(nx.add(p, v) for p in K.vertices), K.dim)


def scale(K: Polytope, lam) -> Polytope:
    lam = nx.to_rational(lam)
    if lam <= 0:
        raise NonpositiveScalar(f"scale factor must be positive, got {lam}")
    return Polytope._trusted(tuple(nx.scale(lam, v) for v in K.vertices), K.dim)


def scale_nonneg(K: Polytope, lam) -> Polytope:
    """Like :func:`scale` but 0 * K = {0}, the neutral element of Minkowski addition."""
    lam = nx.to_rational(lam)
    if lam == 0:
        return Polytope.point(nx.zeros(K.dim))
    return scale(K, lam)


def contains(K: Polytope, p: Sequence) -> bool:
    p = nx.vector(p)
    _check_dim(K, len(p))
    if K.is_singleton:
        return K.vertices[0] == p
    return _in_hull_of(p, list(K.vertices))


def affine_dim(K: Polytope) -> int:
    base = K.vertices[0]
    return nx.rank([nx.sub(v, base) for v in K.vertices[1:]]) if len(K.vertices) > 1 else 0


def is_simplex(K: Polytope) -> bool:
    return len(K.vertices) == affine_dim(K) + 1


def barycentric_coordinates(K: Polytope, p: Sequence) -> Vector:
    """Weights beta >= 0, sum 1, with sum beta_i v_i = p, for a simplex K."""
    p = nx.vector(p)
    _check_dim(K, len(p))
    n = len(K.vertices)
    rows = [tuple(v[k] for v in K.vertices) for k in range(K.dim)] + [(ONE,) * n]
    beta = nx.solve(rows, p + (ONE,))
    if beta is None or any(b < 0 for b in beta):
        raise PointOutside(f"point {p} is not in the polytope")
    return beta


def concave_envelope_eval(K: Polytope, vertex_values: Sequence, x: Sequence, function=None) -> Fraction:
    """Concave envelope at x of the convex function with the given vertex values.

    The envelope of a convex function on a polytope depends only on its values
    at the vertices, and equals max sum(lambda_i * value_i) over all convex
    representations x = sum(lambda_i * v_i).  If ``function`` is given it is
    checked to agree with ``vertex_values`` and to stay below the result.
    """
    values = nx.vector(vertex_values)
    x = nx.vector(x)
    _check_dim(K, len(x))
    n = len(K.vertices)
    if len(values) != n:
        raise ArityMismatch(f"{len(values)} values for {n} vertices")
    eqs = [((ONE,) * n, ONE)] + [(tuple(v[k] for v in K.vertices), x[k]) for k in range(K.dim)]
    res = nx.optimize(LinearProgram(n, tuple(eqs), (), frozenset(range(n)), values), "max")
    if res.status != "optimal":
        raise PointOutside(f"point {x} is not in the polytope")
    if function is not None:
        if any(nx.to_rational(function(v)) != val for v, val in zip(K.vertices, values)):
            raise ValueError("function disagrees with the vertex values")
        if nx.to_rational(function(x)) > res.value:
            raise ValueError("function exceeds its envelope; it is not convex")
    return res.value


# --- implicit polytopes ---------------------------------------------------


def _shift(rows, offset: int, n: int):
    """Embed rows over k variables into n variables starting at ``offset``."""
    out = []
    for a, b in rows:
        full = [ZERO] * n
        full[offset : offset + len(a)] = a
        out.append((tuple(full), b))
    return out


@dataclass(frozen=True)
class ImplicitPolytope:
    """The set {image @ w + offset : w feasible for lp} (assumed bounded)."""

    lp: LinearProgram
    image: tuple
    offset: Vector

    @property
    def dim(self) -> int:
        return len(self.offset)

    @property
    def n_vars(self) -> int:
        return self.lp.n_vars

    @classmethod
    def of(cls, K: Union[Polytope, "ImplicitPolytope"]) -> "ImplicitPolytope":
        if isinstance(K, ImplicitPolytope):
            return K
        n = len(K.vertices)
        lp = LinearProgram(n, (((ONE,) * n, ONE),), (), frozenset(range(n)))
        image = tuple(tuple(v[k] for v in K.vertices) for k in range(K.dim))
        return cls(lp, image, nx.zeros(K.dim))

    def _pull(self, f) -> tuple[Vector, Fraction]:
        """Coefficients of f(image @ w + offset) in w, and its constant term."""
        f = as_functional(f)
        if f.dim != self.dim:
            raise MixedDimensions("functional dimension differs from the polytope dimension")
        n = self.n_vars
        coeffs = [ZERO] * n
        for fk, row in zip(f.coeffs, self.image):
            if fk:
                for j, a in enumerate(row):
                    if a:
                        coeffs[j] += fk * a
        return tuple(coeffs), nx.dot(f.coeffs, self.offset)

    def map_point(self, w: Sequence) -> Vector:
        return nx.add(nx.mat_vec(self.image, w), self.offset)

    def support(self, f) -> SupportInterval:
        coeffs, const = self._pull(f)
        lp = self.lp.with_objective(coeffs)
        lo = nx.optimize(lp, "min")
        if lo.status == "infeasible":
            raise EmptyInput("support of an empty set")
        hi = nx.optimize(lp, "max")
        if lo.status != "optimal" or hi.status != "optimal":
            raise ValueError("implicit polytope is unbounded")
        return SupportInterval(lo.value + const, hi.value + const)

    def maximize(self, f) -> tuple[Fraction, Vector]:
        coeffs, const = self._pull(f)
        res = nx.optimize(self.lp.with_objective(coeffs), "max")
        if res.status != "optimal":
            raise ValueError(f"maximization failed: {res.status}")
        return res.value + const, self.map_point(res.x)

    def with_level(self, f, c) -> "ImplicitPolytope":
        coeffs, const = self._pull(f)
        lp = self.lp
        lp = LinearProgram(lp.n_vars, lp.equalities + ((coeffs, nx.to_rational(c) - const),), lp.inequalities, lp.nonneg)
        return ImplicitPolytope(lp, self.image, self.offset)

    def membership_program(self, p: Sequence) -> LinearProgram:
        p = nx.vector(p)
        if len(p) != self.dim:
            raise MixedDimensions("point dimension differs from the polytope dimension")
        lp = self.lp
        eqs = tuple((row, pk - ok) for row, pk, ok in zip(self.image, p, self.offset))
        return LinearProgram(lp.n_vars, lp.equalities + eqs, lp.inequalities, lp.nonneg)

    def contains(self, p: Sequence) -> bool:
        return nx.solve_feasibility(self.membership_program(p)).feasible

    def find_point(self) -> Vector | None:
        res = nx.solve_feasibility(self.lp)
        return self.map_point(res.x) if res.feasible else None

    def is_empty(self) -> bool:
        return not nx.solve_feasibility(self.lp).feasible

    def _combined(self, other: "ImplicitPolytope"):
        n1, n2 = self.n_vars, other.n_vars
        n = n1 + n2
        eqs = _shift(self.lp.equalities, 0, n) + _shift(other.lp.equalities, n1, n)
        ineqs = _shift(self.lp.inequalities, 0, n) + _shift(other.lp.inequalities, n1, n)
        nonneg = set(self.lp.nonneg) | {n1 + j for j in other.lp.nonneg}
        return n, eqs, ineqs, frozenset(nonneg)

    def minkowski(self, other: "ImplicitPolytope") -> "ImplicitPolytope":
        if other.dim != self.dim:
            raise MixedDimensions("Minkowski sum of polytopes in different dimensions")
        n, eqs, ineqs, nonneg = self._combined(other)
        image = tuple(r1 + r2 for r1, r2 in zip(self.image, other.image))
        return ImplicitPolytope(LinearProgram(n, tuple(eqs), tuple(ineqs), nonneg), image, nx.add(self.offset, other.offset))

    def intersect(self, other: "ImplicitPolytope") -> "ImplicitPolytope":
        if other.dim != self.dim:
            raise MixedDimensions("intersection of polytopes in different dimensions")
        n, eqs, ineqs, nonneg = self._combined(other)
        for r1, r2, o1, o2 in zip(self.image, other.image, self.offset, other.offset):
            eqs.append((r1 + tuple(-a for a in r2), o2 - o1))
        image = tuple(r1 + (ZERO,) * other.n_vars for r1 in self.image)
        return ImplicitPolytope(LinearProgram(n, tuple(eqs), tuple(ineqs), nonneg), image, self.offset)

    def scaled(self, lam) -> "ImplicitPolytope":
        lam = nx.to_rational(lam)
        if lam < 0:
            raise NonpositiveScalar("negative scale factor")
        image = tuple(nx.scale(lam, r) for r in self.image)
        return ImplicitPolytope(self.lp, image, nx.scale(lam, self.offset))

    def translated(self, v: Sequence) -> "ImplicitPolytope":
        return ImplicitPolytope(self.lp, self.image, nx.add(self.offset, nx.vector(v)))

    def negated(self) -> "ImplicitPolytope":
        return ImplicitPolytope(self.lp, tuple(nx.scale(-ONE, r) for r in self.image), nx.scale(-ONE, self.offset))

    def to_polytope(self) -> Polytope:
        """Materialize the vertex representation by enumerating lifted vertices."""
        rows, rhs, n, split = nx._standard_form(self.lp)
        if not rows:
            ws = [nx.zeros(n)]
        else:
            ws = nx.enumerate_vertices(rows, rhs)
        if not ws:
            raise EmptyInput("implicit polytope is empty")
        return canonicalize([self.map_point(nx._unsplit(w, split)) for w in ws])


def implicit_sum(terms: Sequence[tuple]) -> ImplicitPolytope:
    """sum(c_i * K_i) for nonnegative coefficients c_i, as an implicit polytope."""
    acc = None
    for c, K in terms:
        piece = ImplicitPolytope.of(K).scaled(c)
        acc = piece if acc is None else acc.minkowski(piece)
    if acc is None:
        raise EmptyInput("empty sum")
    return acc


def implicit_product(parts: Sequence) -> ImplicitPolytope:
    """K_1 x ... x K_r in concatenated coordinates."""
    parts = [ImplicitPolytope.of(K) for K in parts]
    if not parts:
        raise EmptyInput("empty product")
    n = sum(P.n_vars for P in parts)
    eqs, ineqs, nonneg, image, offset = [], [], set(), [], []
    start = 0
    for P in parts:
        eqs += _shift(P.lp.equalities, start, n)
        ineqs += _shift(P.lp.inequalities, start, n)
        nonneg |= {start + j for j in P.lp.nonneg}
        for row in P.image:
            full = [ZERO] * n
            full[start : start + P.n_vars] = row
            image.append(tuple(full))
        offset += P.offset
        start += P.n_vars
    lp = LinearProgram(n, tuple(eqs), tuple(ineqs), frozenset(nonneg))
    return ImplicitPolytope(lp, tuple(image), tuple(offset))


def with_linear_equations(P: ImplicitPolytope, rows: Sequence[tuple]) -> ImplicitPolytope:
    """Restrict P by equations a . p = c on its points, given as (a, c) pairs."""
    P = ImplicitPolytope.of(P)
    extra = []
    for a, c in rows:
        coeffs, const = P._pull(Functional(a))
        extra.append((coeffs, nx.to_rational(c) - const))
    lp = LinearProgram(P.lp.n_vars, P.lp.equalities + tuple(extra), P.lp.inequalities, P.lp.nonneg)
    return ImplicitPolytope(lp, P.image, P.offset)
