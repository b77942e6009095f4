import random
from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "exact",
    deadline=None,
    derandomize=True,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("exact")


def rq(rng, lo=-3, hi=3, den=4):
    return Fraction(rng.randint(lo * den, hi * den), den)


def random_points(rng, dim, n, lo=-3, hi=3, den=4):
    return [tuple(rq(rng, lo, hi, den) for _ in range(dim)) for _ in range(n)]


def convex_combo(rng, pts, den=7):
    w = [Fraction(rng.randint(0, den)) for _ in pts]
    if not any(w):
        w[0] = Fraction(1)
    s = sum(w)
    return tuple(sum(wi * p[k] for wi, p in zip(w, pts)) / s for k in range(len(pts[0])))


def brute_vertices(a, b):
    """Basic feasible solutions of {x >= 0 : a x = b} by trying every column subset."""
    from linsel import numerics as nx

    m, n = len(a), len(a[0])
    r = nx.rank(a)
    out = set()
    for cols in combinations(range(n), r):
        sub = [[row[c] for c in cols] for row in a]
        if nx.rank(sub) != r:
            continue
        sol = nx.solve(sub, b)
        if sol is None or any(v < 0 for v in sol):
            continue
        x = [Fraction(0)] * n
        for c, v in zip(cols, sol):
            x[c] = v
        if nx.mat_vec(a, x) == nx.vector(b):
            out.add(tuple(x))
    return sorted(out)


def planar_hull(points):
    """Exact 2-D convex hull (Andrew's monotone chain), strict vertices only."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return sorted(set(lower[:-1] + upper[:-1]))


@pytest.fixture
def rng():
    return random.Random(20240917)


ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``with criterion(n, label, limit): ...``."""
    import time
    from contextlib import contextmanager

    @contextmanager
    def run(number, label, limit=None):
        start = time.perf_counter()
        ok = False
        try:
            yield
            elapsed = time.perf_counter() - start
            ok = limit is None or elapsed < limit
            assert ok, f"criterion {number} took {elapsed:.1f}s, limit {limit}s"
        finally:
            elapsed = time.perf_counter() - start
            ACCEPTANCE.append((number, f"{'PASS' if ok else 'FAIL'} criterion {number}: {label} ({elapsed:.2f}s)"))

    return run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
