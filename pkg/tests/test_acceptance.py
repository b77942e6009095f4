"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that is printed in the terminal summary.
"""

import random
from fractions import Fraction as F
from itertools import product

from linsel import numerics as nx
from linsel import cli
from linsel.apps import RightInverse, RightInverseProblem, min_inverse_constant, right_inverse, right_inverse_through
from linsel.cone import Cone, riesz_interpolate
from linsel.fixtures import (
    SQUARE_BASE_REGIONS,
    SUBMAP_FIXTURE_VALUES,
    dyadic_leaves,
    segment_map,
    square_base_cone,
    square_base_map,
)
from linsel.polytope import Polytope, concave_envelope_eval, contains
from linsel.selection import (
    NestingBasis,
    affine_selection_through,
    barycentric_selection,
    linear_selection_through,
    nesting_selection,
    tomo_coords,
    tomo_reconstruct,
    tomographic_selection,
)
from linsel.svmap import BasisLinear, affine_map_on_simplex, check_superlinear, greatest_linear_submap

from conftest import convex_combo, random_points

TRIANGLE = Polytope([(0, 0), (1, 0), (0, 1)])
TETRAHEDRON = Polytope([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)])


def test_criterion_01_six_superlinear_maps(criterion):
    with criterion(1, "square-base cone census leaves 6 of 32 boolean maps", 60):
        names = list(SQUARE_BASE_REGIONS)
        survivors = [bits for bits in product((0, 1), repeat=len(names)) if check_superlinear(square_base_map(dict(zip(names, bits))), 10_000, 0)]
        assert len(survivors) == 6


def test_criterion_02_greatest_submap(criterion):
    with criterion(2, "greatest linear submap of the square-base fixture", 60):
        T = square_base_map(SUBMAP_FIXTURE_VALUES)
        rep = greatest_linear_submap(T, depth=4, trials=10_000, seed=0)
        assert not rep.exact and rep.depth == 4
        for x in [(0, F(1, 2), 1), (0, F(1, 3), 1), (0, 0, 1), (0, 1, 1), (0, 0, 2)]:
            value, parts = rep.map.evaluate_with_witness(x)
            assert value == 0
            assert nx.combine([1] * len(parts), parts) == x
            assert all(T(p) == 0 for p in parts)
        for x in [(F(1, 2), F(1, 2), 1), (F(1, 3), F(1, 4), 1), (F(3, 4), F(1, 8), 1)]:
            assert rep.map(x) == 1


def test_criterion_03_riesz_failure(criterion):
    with criterion(3, "interpolation on the square-base cone is infeasible, certificate verifies", 1):
        res = riesz_interpolate(
            square_base_cone(with_riesz_side=True),
            [(0, F(1, 2), 1), (F(1, 2), 0, 1)],
            [(F(1, 2), F(1, 2), 1), (0, 0, 1)],
        )
        assert not res.feasible and res.verify()


def test_criterion_04_tomographic_roundtrip(criterion):
    with criterion(4, "500 tomographical roundtrips in dimensions 2-4", 120):
        rng = random.Random(2024)
        for i in range(500):
            dim = 2 + i % 3
            K = Polytope(random_points(rng, dim, rng.randint(1, 7)))
            z = convex_combo(rng, K.vertices)
            assert tomo_reconstruct(K, tomo_coords(z, K)) == z


def _random_map(rng):
    dim = rng.randint(1, 3)
    while True:
        gens = [tuple(rng.randint(-1, 2) for _ in range(dim)) for _ in range(dim)]
        if nx.rank(gens) == dim:
            break
    values = [Polytope(random_points(rng, 2, rng.randint(1, 4), -2, 2, 2)) for _ in gens]
    return BasisLinear(Cone(tuple(gens)), values)


def test_criterion_05_selection_contract(criterion):
    with criterion(5, "selection contract on 100 maps with 200 probes each", 120):
        rng = random.Random(5)
        for _ in range(100):
            A = _random_map(rng)
            x = A.domain.random_point(rng, den=2)
            y = convex_combo(rng, A(x).vertices)
            a = linear_selection_through(A, x, y)
            assert a(x) == y
            for _ in range(200):
                u, v = A.domain.random_point(rng, den=3), A.domain.random_point(rng, den=3)
                lam, mu = F(rng.randint(0, 6), 3), F(rng.randint(0, 6), 2)
                assert a(nx.add(nx.scale(lam, u), nx.scale(mu, v))) == nx.add(nx.scale(lam, a(u)), nx.scale(mu, a(v)))
            for _ in range(20):
                z = A.domain.random_point(rng, den=3)
                assert contains(A(z), a(z))


def test_criterion_06_discontinuous_selection(criterion):
    with criterion(6, "tomographical selection of the segment map is discontinuous at 0"):
        a = tomographic_selection(segment_map(), (0,), (0, 0))
        for x in (0, F(1, 2), 1):
            assert a((x,)) == (0, 0)
        for x in (-1, F(-1, 2)):
            assert a((x,)) == (x, 1)


def test_criterion_07_envelopes(criterion):
    with criterion(7, "envelopes are affine on simplexes and not on the square"):
        rng = random.Random(7)
        for K in (TRIANGLE, TETRAHEDRON):
            for _ in range(50):
                values = [F(rng.randint(-8, 8), 4) for _ in K.vertices]
                p, q = convex_combo(rng, K.vertices), convex_combo(rng, K.vertices)
                mid = nx.scale(F(1, 2), nx.add(p, q))
                env = lambda x: concave_envelope_eval(K, values, x)  # noqa: E731
                assert env(mid) == (env(p) + env(q)) / 2
        square = Polytope.box((0, 0), (1, 1))
        values = [abs(v[0] + v[1] - 1) for v in square.vertices]
        env = lambda x: concave_envelope_eval(square, values, x)  # noqa: E731
        assert env((F(1, 2), F(1, 2))) == 1
        assert (env((F(1, 2), 0)) + env((F(1, 2), 1))) / 2 == F(1, 2)


def test_criterion_08_suspension_coherence(criterion):
    with criterion(8, "suspension and barycentric selections agree"):
        rng = random.Random(8)
        for K in (Polytope([(0,), (1,)]), TRIANGLE, TETRAHEDRON):
            values = [Polytope(random_points(rng, 2, rng.randint(1, 3), -2, 2, 2)) for _ in K.vertices]
            A = affine_map_on_simplex(K, values)
            x = convex_combo(rng, K.vertices)
            y = convex_combo(rng, A((1,) + x).vertices)
            a = affine_selection_through(A, x, y)
            b = barycentric_selection(K, [a(v) for v in K.vertices], A)
            for _ in range(100):
                p = convex_combo(rng, K.vertices)
                assert a(p) == b(p)


def test_criterion_09_right_inverses(criterion):
    with criterion(9, "right inverses of 100 random surjective matrices and the worked examples", 120):
        rng = random.Random(9)
        for _ in range(100):
            m = rng.randint(1, 4)
            n = rng.randint(m, 8)
            while True:
                T = [[F(rng.randint(-3, 3)) for _ in range(n)] for _ in range(m)]
                if nx.rank(T) == m:
                    break
            C = min_inverse_constant(T) + F(rng.randint(0, 4), 2)
            R = right_inverse(RightInverseProblem(T, C))
            assert nx.mat_mul(T, R.M) == nx.identity(m) and R.norm <= C
        assert right_inverse(RightInverseProblem([[1, 1]], 1)).M == ((0,), (1,))
        R = right_inverse_through(RightInverseProblem([[1, 1]], 1, (1, 0)))
        assert isinstance(R, RightInverse) and R.M == ((1,), (0,))
        imp = right_inverse_through(RightInverseProblem([[1, 1]], 1, (2, -1)))
        assert not isinstance(imp, RightInverse) and imp.verify()


def _mass_map(n):
    units = tuple(nx.unit(n, k) for k in range(n))
    return BasisLinear(Cone(units), [Polytope([(0,), (1,)])] * n)


def test_criterion_10_nesting(criterion, tmp_path):
    with criterion(10, "nesting selections on depth-3 dyadic trees"):
        B = NestingBasis.from_leaves(dyadic_leaves(3))
        T = _mass_map(8)
        for rule in ("leftmost", "midpoint"):
            S = nesting_selection(B, T, (F(5, 7),), rule)
            for n in range(3):
                for k in range(2**n):
                    assert S.node_value(n, k) == nx.add(S.node_value(n + 1, 2 * k), S.node_value(n + 1, 2 * k + 1))
            assert all(v == (0,) for v in nesting_selection(B, T, (0,), rule).values.values())
            full = nesting_selection(B, T, (1,), rule)
            assert all(v == (sum(B.node(n, k)),) for (n, k), v in full.values.items())
        # the bundled fixture runs through the CLI as well
        assert cli.run("run", "fixture:nesting-dyadic", str(tmp_path / "nesting.json")) == 0
