import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linsel import numerics as nx
from linsel.cone import Cone
from linsel.errors import (
    ArityMismatch,
    ChoiceOutsideValue,
    InfeasibleSplit,
    NoSelection,
    NotExhaustive,
    NotLinear,
    NotSimplex,
    PointNotInValue,
    PointOutside,
)
from linsel.fixtures import dyadic_leaves, segment_map
from linsel.polytope import Functional, ImplicitPolytope, Polytope, contains
from linsel.selection import (
    BasisTableSelection,
    FunctionalSet,
    NestingBasis,
    TomoCoords,
    affine_selection_through,
    barycentric_selection,
    linear_selection_through,
    nesting_selection,
    section_map,
    selection_exists_through,
    tomo_coords,
    tomo_reconstruct,
    tomographic_selection,
)
from linsel.svmap import BasisLinear, PointwiseMap, SampledSuperlinear, affine_map_on_simplex, check_linear, convex_map, polytope_space

from conftest import convex_combo, random_points

SQUARE = Polytope.box((0, 0), (1, 1))
TRIANGLE = Polytope([(0, 0), (2, 0), (0, 2)])
ORTHANT2 = Cone(((1, 0), (0, 1)))
SQUARE_MAP = BasisLinear(ORTHANT2, [Polytope([(0, 0), (1, 0)]), Polytope([(0, 0), (0, 1)])])
UNIT = Polytope([(0,), (1,)])
seeds = st.integers(0, 2**32)


def random_basis_linear(rng, dim, wdim):
    while True:
        gens = [tuple(rng.randint(-1, 2) for _ in range(dim)) for _ in range(dim)]
        if nx.rank(gens) == dim:
            break
    values = [Polytope(random_points(rng, wdim, rng.randint(1, 4), -2, 2, 2)) for _ in gens]
    return BasisLinear(Cone(tuple(gens)), values)


# --- functionals ------------------------------------------------------------------


def test_functional_set_validation():
    assert FunctionalSet.coordinates(3, [2, 0, 1]).functionals[0].coeffs == (0, 0, 1)
    with pytest.raises(NotExhaustive):
        FunctionalSet(((1, 0), (2, 0)))
    with pytest.raises(NotExhaustive):
        FunctionalSet.coordinates(2, [0, 0])


def test_tomo_coords_range_is_checked():
    with pytest.raises(ValueError):
        TomoCoords((F(3, 2),))


# --- tomography -------------------------------------------------------------------


def test_tomo_examples():
    assert tomo_coords((F(1, 2), F(3, 4)), SQUARE).thetas == (F(1, 2), F(3, 4))
    assert tomo_coords((3, 4), Polytope.point((3, 4))).thetas == (0, 0)
    assert tomo_coords((1, 1), TRIANGLE).thetas == (F(1, 2), 1)


def test_reconstruct_examples():
    for z, K in [((F(1, 2), F(3, 4)), SQUARE), ((3, 4), Polytope.point((3, 4))), ((1, 1), TRIANGLE)]:
        assert tomo_reconstruct(K, tomo_coords(z, K)) == z
    assert tomo_reconstruct(SQUARE, (0, 0)) == (0, 0)
    assert tomo_reconstruct(TRIANGLE, (F(1, 2), 1)) == (1, 1)


def test_tomo_errors():
    with pytest.raises(PointOutside):
        tomo_coords((2, 2), SQUARE)
    with pytest.raises(ArityMismatch):
        tomo_reconstruct(SQUARE, (0,))


def test_functional_order_changes_coordinates():
    K = Polytope([(0, 0), (2, 0), (0, 1)])
    z = (1, F(1, 4))
    a = tomo_coords(z, K, FunctionalSet.coordinates(2, [0, 1]))
    b = tomo_coords(z, K, FunctionalSet.coordinates(2, [1, 0]))
    assert a != b
    assert tomo_reconstruct(K, b, FunctionalSet.coordinates(2, [1, 0])) == z


@given(seeds, st.integers(2, 4))
def test_tomo_roundtrip(seed, dim):
    rng = random.Random(seed)
    K = Polytope(random_points(rng, dim, rng.randint(1, 8)))
    z = convex_combo(rng, K.vertices)
    assert tomo_reconstruct(K, tomo_coords(z, K)) == z


@given(seeds, st.integers(2, 3))
def test_reconstruction_ends_in_a_single_vertex(seed, dim):
    rng = random.Random(seed)
    K = Polytope(random_points(rng, dim, rng.randint(1, 6)))
    theta = [F(rng.randint(0, 4), 4) for _ in range(dim)]
    P = ImplicitPolytope.of(K)
    for f, t in zip(FunctionalSet.coordinates(dim), theta):
        lo, hi = P.support(f)
        P = P.with_level(f, lo + t * (hi - lo))
    assert P.to_polytope().is_singleton


# --- section maps -----------------------------------------------------------------


def test_section_map_examples():
    S = section_map(SQUARE_MAP, Functional((1, 0)), 0)
    assert S((1, 1)) == Polytope([(0, 0), (0, 1)])
    singleton = BasisLinear(ORTHANT2, [Polytope([(1, 2)]), Polytope([(3, -1)])])
    S = section_map(singleton, Functional((1, 1)), F(1, 3))
    assert all(S(x) == singleton(x) for x in [(1, 0), (2, 5), (0, 0)])
    flat = BasisLinear(ORTHANT2, [Polytope([(0, 0), (0, 1)]), Polytope([(0, 2), (0, 3)])])
    S = section_map(flat, Functional((1, 0)), F(1, 2))
    assert all(S(x) == flat(x) for x in [(1, 0), (1, 1), (2, 3)])


def test_section_map_falls_back_to_lazy_when_sections_do_not_commute():
    A = BasisLinear(ORTHANT2, [Polytope([(0, 0), (1, 1)]), Polytope([(0, 0), (1, -1)])])
    S = section_map(A, Functional((1, 0)), F(1, 2))
    assert not isinstance(S, BasisLinear)
    assert S((1, 1)) == Polytope([(1, -1), (1, 1)])


# --- linear selections ------------------------------------------------------------


def test_linear_selection_on_square_map():
    a = linear_selection_through(SQUARE_MAP, (1, 1), (F(1, 4), F(3, 4)))
    assert a.kind == "basis-table" and a.route == "tomographic"
    assert a((1, 0)) == (F(1, 4), 0) and a((0, 1)) == (0, F(3, 4))


def test_singleton_map_has_the_unique_selection():
    A = BasisLinear(ORTHANT2, [Polytope([(1, 2)]), Polytope([(3, -1)])])
    x = (2, 3)
    a = linear_selection_through(A, x, A(x).vertices[0])
    assert a((1, 0)) == (1, 2) and a((0, 1)) == (3, -1)


def test_fiber_route_when_sections_do_not_commute():
    A = BasisLinear(ORTHANT2, [Polytope([(0, 0), (1, 1)]), Polytope([(0, 0), (1, -1)])])
    a = linear_selection_through(A, (1, 1), (1, F(1, 2)))
    assert a.route == "fiber"
    assert a((1, 1)) == (1, F(1, 2))
    assert contains(A((1, 0)), a((1, 0))) and contains(A((0, 1)), a((0, 1)))


def test_linear_selection_errors():
    with pytest.raises(PointNotInValue):
        linear_selection_through(SQUARE_MAP, (1, 1), (2, 0))
    with pytest.raises(NotLinear):
        linear_selection_through(segment_map(), (0,), (0, 0))


def test_discontinuous_tomographic_selection():
    a = tomographic_selection(segment_map(), (0,), (0, 0))
    for x in (0, F(1, 2), 1):
        assert a((x,)) == (0, 0)
    for x in (-1, F(-1, 2)):
        assert a((x,)) == (x, 1)
    unchecked = linear_selection_through(segment_map(), (0,), (0, 0), verify=False)
    assert unchecked((-1,)) == (-1, 1)


def test_converting_a_linear_pointwise_map():
    A = PointwiseMap(ORTHANT2, SQUARE_MAP.evaluate, polytope_space(2))
    a = linear_selection_through(A, (1, 1), (F(1, 4), F(3, 4)))
    assert isinstance(a, BasisTableSelection) and a((1, 0)) == (F(1, 4), 0)


@settings(max_examples=15)
@given(seeds)
def test_selection_contract(seed):
    rng = random.Random(seed)
    dim = rng.randint(1, 3)
    A = random_basis_linear(rng, dim, rng.randint(1, 3))
    x = A.domain.random_point(rng, den=2)
    y = convex_combo(rng, A(x).vertices)
    a = linear_selection_through(A, x, y)
    assert a(x) == y
    for _ in range(5):
        u, v = A.domain.random_point(rng, den=2), A.domain.random_point(rng, den=2)
        lam, mu = F(rng.randint(0, 5), 2), F(rng.randint(0, 5), 3)
        assert a(nx.add(nx.scale(lam, u), nx.scale(mu, v))) == nx.add(nx.scale(lam, a(u)), nx.scale(mu, a(v)))
        assert contains(A(u), a(u))


# --- existence --------------------------------------------------------------------


def test_existence_examples():
    assert selection_exists_through(SQUARE_MAP, (2, 1), (1, 1)).answer == "yes"
    T = SampledSuperlinear([((1, 0), UNIT), ((0, 1), UNIT), ((1, 1), Polytope([(0,), (3,)]))])
    no = selection_exists_through(T, (1, 1), (3,))
    assert no.answer == "no" and set(no.witness) == {(1, 0), (0, 1)}
    yes = selection_exists_through(T, (1, 1), (2,))
    assert yes.answer == "yes"
    assert yes.selection((1, 0)) == (1,) and yes.selection((0, 1)) == (1,)
    with pytest.raises(PointNotInValue):
        selection_exists_through(T, (1, 1), (4,))


@given(seeds)
def test_linear_maps_always_admit_selections(seed):
    rng = random.Random(seed)
    A = random_basis_linear(rng, 2, 2)
    x = A.domain.random_point(rng, den=2)
    assert selection_exists_through(A, x, convex_combo(rng, A(x).vertices)).answer == "yes"


def test_non_linear_sampled_maps_have_a_refused_graph_point():
    rng = random.Random(11)
    found = 0
    for _ in range(10):
        tops = [F(rng.randint(1, 3)) for _ in range(2)]
        extra = sum(tops) + rng.randint(1, 3)
        T = SampledSuperlinear([((1, 0), Polytope([(0,), (tops[0],)])), ((0, 1), Polytope([(0,), (tops[1],)])), ((1, 1), Polytope([(0,), (extra,)]))])
        assert not check_linear(T, 50, 0)
        x = (1, 1)
        assert any(selection_exists_through(T, x, v).answer == "no" for v in T(x).vertices)
        found += 1
    assert found == 10


def test_existence_off_cone_basis_domains_is_three_valued():
    gens = [(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)]
    samples = [(g, UNIT) for g in gens] + [((F(1, 2), F(1, 2), 1), Polytope([(0,), (3,)]))]
    T = SampledSuperlinear(samples)
    res = selection_exists_through(T, (F(1, 2), F(1, 2), 1), (3,))
    assert res.answer == "no" and nx.combine([1] * len(res.witness), res.witness) == (F(1, 2), F(1, 2), 1)
    assert selection_exists_through(T, (F(1, 2), F(1, 2), 1), (0,)).answer == "unknown"


# --- affine and barycentric selections ---------------------------------------------


TENT = convex_map([((0,), Polytope([(0,)])), ((F(1, 2),), UNIT), ((1,), Polytope([(0,)]))])


def test_affine_selection_examples():
    a = affine_selection_through(TENT, (F(1, 2),), (0,))
    assert all(a((F(k, 8),)) == (0,) for k in range(9))
    with pytest.raises(NoSelection):
        affine_selection_through(TENT, (F(1, 2),), (F(1, 4),))
    K = Polytope([(0,), (1,)])
    A = affine_map_on_simplex(K, [Polytope([(0,), (1,)]), Polytope([(2,), (4,)])])
    a = affine_selection_through(A, (F(1, 3),), (F(3, 2),))
    assert a((F(1, 3),)) == (F(3, 2),)
    assert contains(A((1, 0)), a((0,))) and contains(A((1, 1)), a((1,)))


def test_barycentric_examples():
    a = barycentric_selection(TRIANGLE, [(5, 5)] * 3)
    assert a((F(1, 2), F(1, 3))) == (5, 5)
    choices = [(F(1, 3),), (2,), (-1,)]
    a = barycentric_selection(TRIANGLE, choices)
    assert a((F(2, 3), F(2, 3))) == (F(sum(c[0] for c in choices)) / 3,)
    with pytest.raises(NotSimplex):
        barycentric_selection(SQUARE, [(0,)] * 4)
    A = affine_map_on_simplex(TRIANGLE, [UNIT] * 3)
    with pytest.raises(ChoiceOutsideValue):
        barycentric_selection(TRIANGLE, [(2,), (0,), (0,)], A)


@pytest.mark.parametrize("K", [Polytope([(0,), (1,)]), TRIANGLE, Polytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])])
def test_suspension_and_barycentric_selections_agree(K):
    rng = random.Random(len(K.vertices))
    values = [Polytope(random_points(rng, 2, rng.randint(1, 3), -2, 2, 2)) for _ in K.vertices]
    A = affine_map_on_simplex(K, values)
    x = convex_combo(rng, K.vertices)
    y = convex_combo(rng, A((1,) + x).vertices)
    a = affine_selection_through(A, x, y)
    b = barycentric_selection(K, [a(v) for v in K.vertices], A)
    for _ in range(20):
        p = convex_combo(rng, K.vertices)
        assert a(p) == b(p)
        assert a(p) == a.linear((1,) + p)


# --- nesting ----------------------------------------------------------------------


def mass_map(n):
    units = tuple(tuple(1 if i == k else 0 for i in range(n)) for k in range(n))
    return BasisLinear(Cone(units), [UNIT] * n)


def test_nesting_midpoint_example():
    B = NestingBasis.from_leaves(dyadic_leaves(2))
    S = nesting_selection(B, mass_map(4), (F(3, 4),), "midpoint")
    assert S.node_value(1, 0) == S.node_value(1, 1) == (F(3, 8),)
    assert all(S.node_value(2, k) == (F(3, 16),) for k in range(4))


@pytest.mark.parametrize("rule", ["leftmost", "midpoint"])
def test_nesting_forced_selections(rule):
    B = NestingBasis.from_leaves(dyadic_leaves(2))
    zero = nesting_selection(B, mass_map(4), (0,), rule)
    assert all(v == (0,) for v in zero.values.values())
    full = nesting_selection(B, mass_map(4), (1,), rule)
    for (n, k), v in full.values.items():
        assert v == (sum(B.node(n, k)),)


def test_nesting_additivity_and_extension():
    B = NestingBasis.from_leaves(dyadic_leaves(3))
    S = nesting_selection(B, mass_map(8), (F(5, 7),), "leftmost")
    for n in range(3):
        for k in range(2**n):
            assert S.node_value(n, k) == nx.add(S.node_value(n + 1, 2 * k), S.node_value(n + 1, 2 * k + 1))
    assert S(B.node(1, 1)) == S.node_value(1, 1)


def test_nesting_basis_validation_and_infeasible_split():
    with pytest.raises(ValueError):
        NestingBasis((((1,),), ((1,), (1,))))
    B = NestingBasis.from_leaves(dyadic_leaves(1))
    # T is not additive on the tree: T(root) = [0, 1] but children only reach 1/4 together
    T = PointwiseMap(Cone(((1, 0), (0, 1))), lambda b: Polytope([(0,), (sum(b),)]) if sum(b) == 1 else Polytope([(0,), (sum(b) / 4,)]), polytope_space(1))
    with pytest.raises(InfeasibleSplit):
        nesting_selection(B, T, (1,), "leftmost")
