"""Set-valued maps on cones and their greatest linear submaps.

Values live either in the space of polytopes (sum = Minkowski sum, order =
inclusion) or in the two-point space {0, 1} (sum = max, order = <=).  Four
representations share one evaluation contract:

* :class:`BasisLinear` -- a value per cone-basis generator, extended
  linearly;
* :class:`SampledSuperlinear` -- the smallest superlinear map through a finite
  list of samples;
* :class:`BooleanRegion` -- a 0/1 value per open face of a face-restricted
  cone;
* :class:`PointwiseMap` -- any callable, for maps that fit none of the above.

The greatest linear submap is exact on cones with a cone-basis.  Elsewhere it
is approximated from above by a bounded search over decompositions, and the
search depth is reported with the result.
"""

from __future__ import annotations

import logging
import random
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Callable, Iterable, Mapping, Sequence

from . import numerics as nx
from .cone import Cone, coords, ray_canonical
from .errors import (
    DomainError,
    InputError,
    MixedDimensions,
    NoRepresentation,
    NotInCone,
    NotInDomain,
    NotSuperlinear,
)
from .numerics import ONE, ZERO, Vector
from .polytope import (
    ImplicitPolytope,
    Polytope,
    canonicalize,
    contains,
    implicit_sum,
    minkowski_sum,
    minkowski_sum_all,
    scale_nonneg,
)

log = logging.getLogger(__name__)


# --- value spaces ---------------------------------------------------------------


@dataclass(frozen=True)
class ValueSpace:
    """Either ``ValueSpace("polytope", d)`` or ``ValueSpace("boolean")``."""

    kind: str
    dim: int | None = None

    @property
    def is_boolean(self) -> bool:
        return self.kind == "boolean"

    def zero(self):
        return 0 if self.is_boolean else Polytope.point(nx.zeros(self.dim))

    def add(self, a, b):
        return max(a, b) if self.is_boolean else minkowski_sum(a, b)

    def sum(self, values: Iterable):
        acc = self.zero()
        for v in values:
            acc = self.add(acc, v)
        return acc

    def scale(self, lam, a):
        if self.is_boolean:
            return a if lam > 0 else 0
        return scale_nonneg(a, lam)

    def leq(self, a, b) -> bool:
        if self.is_boolean:
            return a <= b
        return all(contains(b, v) for v in a.vertices)

    def meet(self, a, b):
        """Infimum of two values (intersection for polytopes; None if empty)."""
        if self.is_boolean:
            return min(a, b)
        if self.leq(a, b):
            return a
        if self.leq(b, a):
            return b
        inter = ImplicitPolytope.of(a).intersect(ImplicitPolytope.of(b))
        return None if inter.is_empty() else inter.to_polytope()


BOOLEAN = ValueSpace("boolean")


def polytope_space(dim: int) -> ValueSpace:
    return ValueSpace("polytope", dim)


def _space_of(value) -> ValueSpace:
    if isinstance(value, Polytope):
        return polytope_space(value.dim)
    if value in (0, 1):
        return BOOLEAN
    raise InputError(f"unsupported map value {value!r}")


# --- representations ------------------------------------------------------------


class SetValuedMap(ABC):
    """A map from a cone to polytopes or to {0, 1}."""

    domain: Cone
    space: ValueSpace

    @abstractmethod
    def evaluate(self, x: Sequence):
        ...

    def __call__(self, x: Sequence):
        return self.evaluate(x)

    def evaluate_implicit(self, x: Sequence) -> ImplicitPolytope:
        return ImplicitPolytope.of(self.evaluate(x))

    def _check_point(self, x) -> Vector:
        x = nx.vector(x)
        if len(x) != self.domain.dim:
            raise MixedDimensions(f"point of dimension {len(x)} for a domain in dimension {self.domain.dim}")
        return x


class BasisLinear(SetValuedMap):
    """x -> sum_b alpha_b(x) * value_b over the cone-basis of the domain."""

    def __init__(self, domain: Cone, values: Sequence):
        if not domain.basis_flag:
            raise InputError("BasisLinear needs linearly independent generators")
        values = tuple(values)
        if len(values) != len(domain.generators):
            raise InputError(f"{len(values)} values for {len(domain.generators)} generators")
        spaces = {_space_of(v) for v in values}
        if len(spaces) != 1:
            raise MixedDimensions("values live in different spaces")
        self.domain = domain
        self.values = values
        self.space = spaces.pop()

    @classmethod
    def from_generators(cls, pairs: Sequence[tuple]) -> "BasisLinear":
        """Build from (generator, value) pairs with arbitrary positive scaling of generators."""
        gens, vals = [], []
        for g, value in pairs:
            g = nx.vector(g)
            r = ray_canonical(g)
            s = next(a for a in g if a) / next(a for a in r if a)
            gens.append(r)
            vals.append(value if not isinstance(value, Polytope) else scale_nonneg(value, 1 / s))
        return cls(Cone(tuple(gens)), vals)

    def coords(self, x) -> Vector:
        try:
            return coords(self.domain, self._check_point(x))
        except NotInCone as exc:
            raise NotInDomain(str(exc)) from None

    def evaluate(self, x: Sequence):
        alpha = self.coords(x)
        if self.space.is_boolean:
            return max((v for a, v in zip(alpha, self.values) if a), default=0)
        terms = [scale_nonneg(v, a) for a, v in zip(alpha, self.values) if a]
        return minkowski_sum_all(terms) if terms else self.space.zero()

    def evaluate_implicit(self, x: Sequence) -> ImplicitPolytope:
        alpha = self.coords(x)
        terms = [(a, v) for a, v in zip(alpha, self.values) if a]
        if not terms:
            return ImplicitPolytope.of(self.space.zero())
        return implicit_sum(terms)

    def __repr__(self):
        return f"BasisLinear(generators={len(self.domain.generators)}, space={self.space.kind})"


class SampledSuperlinear(SetValuedMap):
    """Smallest superlinear positively homogeneous map with P_i in T(x_i).

    T(x) is the hull, over the vertices lambda of
    Lambda(x) = {lambda >= 0 : sum lambda_i x_i = x}, of sum lambda_i P_i.
    Vertices suffice because each support function of sum lambda_i P_i is
    linear in lambda.
    """

    def __init__(self, samples: Sequence[tuple]):
        pts, vals = [], []
        for x, P in samples:
            pts.append(nx.vector(x))
            vals.append(P if isinstance(P, Polytope) else Polytope(P))
        if not pts:
            raise InputError("at least one sample is required")
        nx.common_dim(pts)
        if len({P.dim for P in vals}) != 1:
            raise MixedDimensions("sample values live in different dimensions")
        self.points = tuple(pts)
        self.values = tuple(vals)
        self.domain = Cone(self.points)
        self.space = polytope_space(vals[0].dim)
        if not self.domain.is_pointed:
            raise InputError("sample points must span a pointed cone")
        self._cache: dict = {}

    def representations(self, x: Vector) -> list:
        cols = [tuple(p[k] for p in self.points) for k in range(len(x))]
        return nx.enumerate_vertices(cols, x)

    def evaluate(self, x: Sequence) -> Polytope:
        x = self._check_point(x)
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        lams = self.representations(x)
        if not lams:
            raise NoRepresentation(f"point {x} has no representation over the samples")
        pts = []
        for lam in lams:
            terms = [scale_nonneg(P, l) for l, P in zip(lam, self.values) if l]
            total = minkowski_sum_all(terms) if terms else self.space.zero()
            pts.extend(total.vertices)
        result = canonicalize(pts)
        self._cache[x] = result
        return result

    def __repr__(self):
        return f"SampledSuperlinear(samples={len(self.points)})"


class BooleanRegion(SetValuedMap):
    """A 0/1 value on each open face of a face-restricted cone."""

    def __init__(self, domain: Cone, values: Mapping, names: Mapping | None = None):
        if domain.faces is None:
            raise InputError("BooleanRegion needs a face-restricted cone")
        vals = {frozenset(f): v for f, v in values.items()}
        if set(vals) != set(domain.faces):
            raise InputError("values must be given for exactly the faces of the domain")
        if any(v not in (0, 1) for v in vals.values()):
            raise InputError("boolean values must be 0 or 1")
        self.domain = domain
        self.space = BOOLEAN
        self.values = vals
        self.names = {frozenset(f): n for f, n in (names or {}).items()}

    def region_of(self, x: Sequence) -> frozenset:
        x = self._check_point(x)
        face = self.domain.face_of(x)
        if face not in self.values or not self.domain.in_closure(x):
            raise NotInDomain(f"point {x} is not in the domain")
        return face

    def region_name(self, x: Sequence) -> str:
        face = self.region_of(x)
        return self.names.get(face, str(sorted(face)))

    def evaluate(self, x: Sequence) -> int:
        return self.values[self.region_of(x)]

    def with_values(self, values: Mapping) -> "BooleanRegion":
        return BooleanRegion(self.domain, values, self.names)

    def __repr__(self):
        table = {self.names.get(f, str(sorted(f))): v for f, v in self.values.items()}
        return f"BooleanRegion({table})"


class PointwiseMap(SetValuedMap):
    """A map given by a Python callable returning Polytopes (or 0/1 values)."""

    def __init__(self, domain: Cone, func: Callable, space: ValueSpace, name: str = "pointwise"):
        self.domain = domain
        self.func = func
        self.space = space
        self.name = name

    def evaluate(self, x: Sequence):
        x = self._check_point(x)
        if not self.domain.contains(x):
            raise NotInDomain(f"point {x} is not in the domain")
        value = self.func(x)
        if not self.space.is_boolean and not isinstance(value, Polytope):
            value = Polytope(value)
        return value

    def __repr__(self):
        return f"PointwiseMap({self.name})"


# --- checkers -------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    """Outcome of a randomized check.  Truthy when no refutation was found.

    A pass is evidence, not proof.  A refutation names the offending points
    and the kind of failure (``"additivity"``, ``"homogeneity"`` or
    ``"apex"``).
    """

    passed: bool
    trials: int
    x: Vector | None = None
    y: Vector | None = None
    reason: str = ""

    def __bool__(self):
        return self.passed


@lru_cache(maxsize=64)
def _sample_pairs(domain: Cone, trials: int, seed: int) -> tuple:
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        out.append((_random_domain_point(domain, rng), _random_domain_point(domain, rng)))
    return tuple(out)


def _random_domain_point(domain: Cone, rng: random.Random) -> Vector:
    if domain.faces is not None:
        return domain.random_domain_point(rng)
    n = len(domain.generators)
    while True:
        face = [i for i in range(n) if rng.random() < 0.7]
        if face:
            return domain.random_point(rng, face)


def _homogeneity_factor(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(1, 9), rng.randint(1, 5))


def _run_check(T: SetValuedMap, trials: int, seed: int, exact: bool) -> CheckResult:
    space = T.space
    zero = nx.zeros(T.domain.dim)
    if T.domain.contains(zero) and T.evaluate(zero) != space.zero():
        return CheckResult(False, 0, zero, zero, "apex")
    rng = random.Random(seed ^ 0x5EED)
    for i, (x, y) in enumerate(_sample_pairs(T.domain, trials, seed)):
        tx, ty, txy = T.evaluate(x), T.evaluate(y), T.evaluate(nx.add(x, y))
        total = space.add(tx, ty)
        ok = total == txy if exact else space.leq(total, txy)
        if not ok:
            return CheckResult(False, i + 1, x, y, "additivity")
        if not space.is_boolean and i % 4 == 0:
            lam = _homogeneity_factor(rng)
            if T.evaluate(nx.scale(lam, x)) != space.scale(lam, tx):
                return CheckResult(False, i + 1, x, nx.scale(lam, x), "homogeneity")
    return CheckResult(True, trials)


def check_superlinear(T: SetValuedMap, trials: int = 200, seed: int = 0) -> CheckResult:
    """Search for x, y with T(x) + T(y) not below T(x + y)."""
    return _run_check(T, trials, seed, exact=False)


def check_linear(T: SetValuedMap, trials: int = 200, seed: int = 0) -> CheckResult:
    """Search for x, y with T(x) + T(y) != T(x + y), or a homogeneity failure."""
    return _run_check(T, trials, seed, exact=True)


# --- decompositions and greatest submaps -------------------------------------------


def _set_partitions(items: list, max_blocks: int):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest, max_blocks):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]
        if len(part) < max_blocks:
            yield [[first]] + part


def _grid(depth: int) -> list:
    return sorted({Fraction(i, q) for q in range(1, depth + 1) for i in range(1, q)})


def decompositions(domain: Cone, x: Sequence, depth: int, trials: int = 0, seed: int = 0, extra_points=()):
    """Finite decompositions x = p_1 + ... + p_k with every part in ``domain``.

    Deterministic part: x itself, every vertex of the representation polytope
    over the closure's generators and the mixtures of vertex pairs on the
    grids 1/q (q <= depth), each split into at most ``depth`` blocks of ray
    terms; plus two-part splits along ``extra_points`` on the same grids.  The
    candidate set grows with ``depth``.  ``trials`` adds seeded random splits.
    Parts are returned sorted, and each decomposition is yielded once.
    """
    x = nx.vector(x)
    d = len(x)
    gens = domain.generators
    seen = set()

    def emit(parts):
        parts = tuple(sorted(p for p in parts if any(p)))
        if not parts or parts in seen:
            return None
        seen.add(parts)
        if domain.faces is None or all(domain.face_of(p) in domain.faces for p in parts):
            return parts
        return None

    out = emit([x])
    if out:
        yield out
    cols = [tuple(g[k] for g in gens) for k in range(d)]
    verts = nx.enumerate_vertices(cols, x)
    reps = list(verts)
    for s in _grid(depth):
        for a, b in combinations(verts, 2):
            reps.append(tuple((1 - s) * u + s * v for u, v in zip(a, b)))
    for lam in reps:
        terms = [nx.scale(l, g) for l, g in zip(lam, gens) if l]
        for blocks in _set_partitions(terms, max(depth, 1)):
            out = emit([_vsum(b, d) for b in blocks])
            if out:
                yield out
    closure = domain.closure
    for p in extra_points:
        for s in _grid(depth + 1) + [ONE]:
            part = nx.scale(s, nx.vector(p))
            rest = nx.sub(x, part)
            if closure.in_closure(rest):
                out = emit([part, rest])
                if out:
                    yield out
    if trials and verts:
        rng = random.Random(seed)
        for _ in range(trials):
            w = [Fraction(rng.randint(0, 8)) for _ in verts]
            if not any(w):
                w[rng.randrange(len(w))] = ONE
            tot = sum(w)
            lam = [sum(wi * v[g] for wi, v in zip(w, verts)) / tot for g in range(len(gens))]
            pieces = []
            for l, g in zip(lam, gens):
                if not l:
                    continue
                cut = Fraction(rng.randint(0, 8), 8)
                pieces.extend([nx.scale(l * cut, g), nx.scale(l * (1 - cut), g)])
            k = rng.randint(1, max(depth, 1))
            blocks = [nx.zeros(d) for _ in range(k)]
            for piece in pieces:
                i = rng.randrange(k)
                blocks[i] = nx.add(blocks[i], piece)
            out = emit(blocks)
            if out:
                yield out


def _vsum(vectors, d) -> Vector:
    acc = nx.zeros(d)
    for v in vectors:
        acc = nx.add(acc, v)
    return acc


class DecompositionSubmap(SetValuedMap):
    """Infimum of T(p_1) + ... + T(p_k) over a bounded family of decompositions.

    This bounds the greatest linear submap from above.  In the boolean space a
    value 0 always comes with a witness decomposition, while a value 1 only
    means no such witness was found.
    """

    def __init__(self, T: SetValuedMap, depth: int, trials: int = 0, seed: int = 0):
        self.T = T
        self.domain = T.domain
        self.space = T.space
        self.depth = depth
        self.trials = trials
        self.seed = seed
        self._cache: dict = {}

    def _extra_points(self):
        return self.T.points if isinstance(self.T, SampledSuperlinear) else ()

    def evaluate_with_witness(self, x: Sequence):
        x = self._check_point(x)
        hit = self._cache.get(x)
        if hit is not None:
            return hit
        T, space = self.T, self.space
        best, witness = None, None
        for parts in decompositions(self.domain, x, self.depth, self.trials, self.seed, self._extra_points()):
            value = space.sum(T.evaluate(p) for p in parts)
            if best is None:
                best, witness = value, parts
                continue
            met = space.meet(best, value)
            if met is None:
                raise DomainError(f"the decomposition infimum at {x} is empty")
            if met != best:
                best, witness = met, parts
            if space.is_boolean and best == 0:
                break
        if best is None:
            raise NotInDomain(f"point {x} is not in the domain")
        self._cache[x] = (best, witness)
        return best, witness

    def evaluate(self, x: Sequence):
        return self.evaluate_with_witness(x)[0]

    def __repr__(self):
        return f"DecompositionSubmap(depth={self.depth}, trials={self.trials})"


@dataclass(frozen=True)
class SubmapReport:
    """A greatest-submap result.  ``depth`` is None exactly when ``exact``."""

    map: object
    exact: bool
    depth: int | None = None
    trials: int = 0

    @property
    def exactness(self) -> str:
        return "exact" if self.exact else f"over-approximation(depth={self.depth})"


def greatest_linear_submap(
    T: SetValuedMap, depth: int = 2, trials: int = 0, seed: int = 0, check_trials: int = 50
) -> SubmapReport:
    """Greatest linear map S with S(x) <= T(x) for all x.

    Exact (S(b) = T(b) on the cone-basis) when the domain has one; otherwise
    the decomposition bound of :class:`DecompositionSubmap`.
    """
    if isinstance(T, BasisLinear):
        return SubmapReport(T, True)
    if check_trials:
        res = check_superlinear(T, check_trials, seed)
        if not res:
            raise NotSuperlinear(f"superlinearity refuted at x={res.x}, y={res.y} ({res.reason})")
    if T.domain.is_closed and T.domain.has_cone_basis:
        basis = T.domain.cone_basis()
        return SubmapReport(BasisLinear(basis, [T.evaluate(b) for b in basis.generators]), True)
    return SubmapReport(DecompositionSubmap(T, depth, trials, seed), False, depth, trials)


# --- convex maps via suspension -------------------------------------------------


def convex_map(samples: Sequence[tuple]) -> SampledSuperlinear:
    """Smallest convex map through samples (p_i, P_i) on a polytope, as a map on its suspension."""
    return SampledSuperlinear([((ONE,) + nx.vector(p), P) for p, P in samples])


def affine_map_on_simplex(K: Polytope, values: Sequence) -> BasisLinear:
    """Affine map on a simplex with the given vertex values, lifted to the suspension."""
    from .polytope import is_simplex

    if not is_simplex(K):
        raise InputError("vertex-valued affine data needs a simplex")
    return BasisLinear(Cone(tuple((ONE,) + v for v in K.vertices)), values)


@dataclass(frozen=True)
class AffineSlice:
    """Restriction of a map on a suspension to the slice {1} x K."""

    linear: object

    def evaluate(self, p: Sequence):
        return self.linear.evaluate((ONE,) + nx.vector(p))

    __call__ = evaluate


def greatest_affine_submap(T: SetValuedMap, depth: int = 2, trials: int = 0, seed: int = 0) -> SubmapReport:
    """Greatest affine submap of a convex map given on the suspension of K."""
    rep = greatest_linear_submap(T, depth, trials, seed)
    return SubmapReport(AffineSlice(rep.map), rep.exact, rep.depth, rep.trials)
