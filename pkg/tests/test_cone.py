import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from linsel import numerics as nx
from linsel.cone import (
    Cone,
    base_of,
    coords,
    has_rdp,
    membership,
    order_interval,
    ray_canonical,
    riesz_interpolate,
    suspend,
)
from linsel.errors import DimensionBudget, NoBase, NoConeBasis, NotInCone, NotPointed, SumMismatch
from linsel.fixtures import SQUARE_BASE_GENERATORS, square_base_cone
from linsel.numerics import solve_feasibility
from linsel.polytope import Polytope, minkowski_sum

ORTHANT2 = Cone(((1, 0), (0, 1)))
ORTHANT3 = Cone(((1, 0, 0), (0, 1, 0), (0, 0, 1)))
SQUARE_CONE = Cone(SQUARE_BASE_GENERATORS)
seeds = st.integers(0, 2**32)


def test_membership_examples():
    assert membership(ORTHANT2, (1, 2))
    assert not membership(ORTHANT2, (-1, 0))
    assert membership(SQUARE_CONE, (F(1, 2), F(1, 2), 1))


def test_coords_examples():
    assert coords(ORTHANT2, (3, 5)) == (3, 5)
    assert coords(Cone(((1, 1), (1, -1))), (2, 0)) == (1, 1)
    assert coords(ORTHANT2, (0, 0)) == (0, 0)
    with pytest.raises(NotInCone):
        coords(ORTHANT2, (-1, 0))
    with pytest.raises(NoConeBasis):
        coords(SQUARE_CONE, (0, 0, 1))


def test_generators_are_ray_canonical_and_deduplicated():
    C = Cone(((2, 4), (1, 2), (0, 3)))
    assert C.generators == ((1, 2), (0, 1))
    assert ray_canonical((-2, 4)) == (-1, 2)


def test_riesz_closed_form_on_the_orthant():
    res = riesz_interpolate(ORTHANT2, [(1, 0), (1, 2)], [(0, 1), (2, 1)])
    assert res.feasible and res.method == "closed-form"
    assert res.grid == (((0, 0), (1, 0)), ((0, 1), (1, 1)))
    assert res.verify()


def test_riesz_single_cell():
    res = riesz_interpolate(SQUARE_CONE, [(1, 1, 2)], [(1, 1, 2)])
    assert res.feasible and res.grid == (((1, 1, 2),),)


def test_riesz_errors():
    with pytest.raises(SumMismatch):
        riesz_interpolate(ORTHANT2, [(1, 0)], [(0, 1)])
    with pytest.raises(NotInCone):
        riesz_interpolate(ORTHANT2, [(-1, 0), (1, 0)], [(0, 0)])


def test_riesz_failure_on_square_base_instance():
    C = square_base_cone(with_riesz_side=True)
    xs = [(0, F(1, 2), 1), (F(1, 2), 0, 1)]
    ys = [(F(1, 2), F(1, 2), 1), (0, 0, 1)]
    res = riesz_interpolate(C, xs, ys)
    assert not res.feasible and res.method == "face-search"
    assert res.branches and res.verify()


def test_riesz_instance_is_feasible_on_the_closure():
    """Documents why the fixture keeps the open-face structure: the closed cone interpolates."""
    xs = [(0, F(1, 2), 1), (F(1, 2), 0, 1)]
    ys = [(F(1, 2), F(1, 2), 1), (0, 0, 1)]
    res = riesz_interpolate(SQUARE_CONE, xs, ys)
    assert res.feasible and res.verify()


def test_tampered_certificate_fails_verification():
    C = square_base_cone(with_riesz_side=True)
    res = riesz_interpolate(C, [(0, F(1, 2), 1), (F(1, 2), 0, 1)], [(F(1, 2), F(1, 2), 1), (0, 0, 1)])
    b = res.branches[0]
    bad = type(b.certificate)(tuple(-v for v in b.certificate.eq), b.certificate.ineq)
    assert not bad.verify(b.program, b.strict)


def test_has_rdp_examples():
    assert has_rdp(ORTHANT3)
    assert not has_rdp(SQUARE_CONE)
    assert has_rdp(Cone(((1, 0), (1, 1), (0, 1))))
    with pytest.raises(NotPointed):
        has_rdp(Cone(((1,), (-1,))))


def test_order_interval_examples():
    assert order_interval(ORTHANT2, (1, 2)) == Polytope.box((0, 0), (1, 2))
    assert order_interval(ORTHANT2, (0, 0)) == Polytope.point((0, 0))
    K = order_interval(SQUARE_CONE, (F(1, 2), F(1, 2), 1))
    assert (0, 0, 0) in K.vertices and (F(1, 2), F(1, 2), 1) in K.vertices
    # every vertex y satisfies y in C and x - y in C
    for y in K.vertices:
        assert SQUARE_CONE.in_closure(y)
        assert SQUARE_CONE.in_closure(nx.sub((F(1, 2), F(1, 2), 1), y))


def test_order_interval_budget():
    gens = [tuple(1 if i == k else 0 for i in range(5)) for k in range(5)]
    with pytest.raises(DimensionBudget):
        order_interval(Cone(tuple(gens)), (1, 1, 1, 1, 1))


def test_suspension_examples():
    assert suspend(Polytope([(0,), (1,)])).cone.generators == ((1, 0), (1, 1))
    tri = suspend(Polytope([(0, 0), (1, 0), (0, 1)])).cone
    assert tri.dim == 3 and len(tri.generators) == 3 and has_rdp(tri)
    assert not has_rdp(suspend(Polytope.box((0, 0), (1, 1))).cone)


def test_base_examples():
    assert base_of(ORTHANT2) == Polytope([(1, 0), (0, 1)])
    assert base_of(SQUARE_CONE) == Polytope([(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)])
    with pytest.raises(NoBase):
        base_of(Cone(((1,), (-1,))))


@given(seeds, st.integers(1, 3))
def test_base_of_suspension_is_identity(seed, dim):
    rng = random.Random(seed)
    K = Polytope([tuple(F(rng.randint(-4, 4), 2) for _ in range(dim)) for _ in range(rng.randint(1, 5))])
    B = base_of(suspend(K).cone)
    assert Polytope([v[1:] for v in B.vertices]) == K
    assert all(v[0] == 1 for v in B.vertices)


def _random_simplicial_cone(rng, dim):
    while True:
        gens = [tuple(rng.randint(-2, 3) for _ in range(dim)) for _ in range(dim)]
        if nx.rank(gens) == dim:
            return Cone(tuple(gens))


@given(seeds, st.integers(1, 4))
def test_coords_roundtrip_and_uniqueness(seed, dim):
    rng = random.Random(seed)
    C = _random_simplicial_cone(rng, dim)
    alpha = [F(rng.randint(0, 12), 4) for _ in range(dim)]
    x = nx.combine(alpha, C.generators)
    got = coords(C, x)
    assert got == tuple(alpha)
    bumped = list(got)
    bumped[rng.randrange(dim)] += 1
    assert nx.combine(bumped, C.generators) != x


@given(seeds, st.integers(1, 3))
def test_simplicial_cones_always_interpolate(seed, dim):
    rng = random.Random(seed)
    C = _random_simplicial_cone(rng, dim)
    assert has_rdp(C)
    xs = [C.random_point(rng, den=2) for _ in range(rng.randint(1, 3))]
    total = nx.zeros(dim)
    for x in xs:
        total = nx.add(total, x)
    # a different decomposition of the same total
    alpha = coords(C, total)
    cut = [F(rng.randint(0, 4), 4) for _ in alpha]
    y1 = nx.combine([a * c for a, c in zip(alpha, cut)], C.generators)
    ys = [y1, nx.sub(total, y1)]
    res = riesz_interpolate(C, xs, ys)
    assert res.feasible and res.verify()


def test_interpolation_holds_on_many_simplicial_instances():
    rng = random.Random(3)
    for _ in range(200):
        C = _random_simplicial_cone(rng, rng.randint(1, 3))
        xs = [C.random_point(rng, den=2) for _ in range(2)]
        total = nx.add(*xs)
        w = F(rng.randint(0, 4), 4)
        ys = [nx.scale(w, total), nx.scale(1 - w, total)]
        assert riesz_interpolate(C, xs, ys).feasible


def test_non_simplicial_closed_cone_can_fail_interpolation():
    """A closed non-simplicial cone: the square-base cone with all faces."""
    # (1,0,1) + (0,1,1) = (0,0,1) + (1,1,1): each side splits only along its own rays
    xs = [(1, 0, 1), (0, 1, 1)]
    ys = [(0, 0, 1), (1, 1, 1)]
    res = riesz_interpolate(SQUARE_CONE, xs, ys)
    assert not res.feasible and res.verify()


@given(seeds, st.integers(1, 3))
def test_order_intervals_add_on_simplicial_cones(seed, dim):
    rng = random.Random(seed)
    C = _random_simplicial_cone(rng, dim)
    x, y = C.random_point(rng, den=2), C.random_point(rng, den=2)
    assert minkowski_sum(order_interval(C, x), order_interval(C, y)) == order_interval(C, nx.add(x, y))


def test_face_restricted_square_base_regions():
    C = square_base_cone()
    assert C.contains((F(1, 2), F(1, 2), 1))
    assert C.contains((0, F(1, 2), 1))
    assert not C.contains((1, F(1, 2), 1))
    assert C.face_of((0, 0, 2)) == frozenset({0})
