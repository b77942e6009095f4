"""Exact rational linear algebra and linear programming.

Scalars are :class:`fractions.Fraction` and vectors are tuples of them.  The
linear-programming layer is a dense two-phase simplex method with Bland's
rule, so every answer is exact and every tie is broken the same way on every
run.  Infeasibility is always reported together with a certificate that can
be re-checked without trusting the solver.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import MalformedProgram, MixedDimensions

try:  # the simplex tableau runs on GMP rationals when available
    from gmpy2 import mpq as _Q
except ImportError:  # pragma: no cover
    _Q = Fraction

Vector = tuple
Matrix = tuple

ZERO = Fraction(0)
ONE = Fraction(1)
_QZERO = _Q(0)
_QONE = _Q(1)


def _out(q) -> Fraction:
    return q if type(q) is Fraction else Fraction(int(q.numerator), int(q.denominator))

_RATIONAL_TEXT = re.compile(r"^[+-]?\d+(/\d+)?$")


def to_rational(value) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused on purpose: they would silently import rounding error
    into computations that are meant to be exact.
    """
    if isinstance(value, Fraction):
        return value
    if type(value) is _Q:
        return _out(value)
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not _RATIONAL_TEXT.match(text):
            raise ValueError(f"not an exact rational literal: {value!r}")
        try:
            return Fraction(text)
        except ZeroDivisionError:
            raise ValueError(f"zero denominator in {value!r}") from None
    raise TypeError(f"expected int, Fraction or 'p/q' string, got {type(value).__name__}")


def vector(values: Iterable) -> Vector:
    return tuple(to_rational(v) for v in values)


def matrix(rows: Iterable[Iterable]) -> Matrix:
    out = tuple(vector(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise MixedDimensions("matrix rows have different lengths")
    return out


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def common_dim(vectors: Sequence[Vector]) -> int:
    dims = {len(v) for v in vectors}
    if len(dims) != 1:
        raise MixedDimensions(f"vectors of dimensions {sorted(dims)} mixed")
    return dims.pop()


def zeros(d: int) -> Vector:
    return (ZERO,) * d


def unit(d: int, i: int) -> Vector:
    return tuple(ONE if k == i else ZERO for k in range(d))


def add(u: Vector, v: Vector) -> Vector:
    return tuple(a + b for a, b in zip(u, v))


def sub(u: Vector, v: Vector) -> Vector:
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v: Vector) -> Vector:
    return tuple(c * a for a in v)


def dot(u: Sequence, v: Sequence) -> Fraction:
    return sum((a * b for a, b in zip(u, v) if a and b), ZERO)


def combine(coeffs: Sequence, vectors: Sequence[Vector]) -> Vector:
    """Linear combination sum(c_i * v_i)."""
    d = len(vectors[0])
    acc = [ZERO] * d
    for c, v in zip(coeffs, vectors):
        if c:
            for k, a in enumerate(v):
                if a:
                    acc[k] += c * a
    return tuple(acc)


def mat_vec(m: Sequence[Sequence], x: Sequence) -> Vector:
    return tuple(dot(row, x) for row in m)


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> Matrix:
    cols = list(zip(*b))
    return tuple(tuple(dot(row, col) for col in cols) for row in a)


def transpose(m: Sequence[Sequence]) -> Matrix:
    return tuple(zip(*m))


def identity(n: int) -> Matrix:
    return tuple(unit(n, i) for i in range(n))


def l1_norm(v: Sequence) -> Fraction:
    return sum((abs(a) for a in v), ZERO)


# --- elimination ----------------------------------------------------------


def rref(rows: Sequence[Sequence], ncols: int | None = None):
    """Reduced row echelon form.  Returns (nonzero rows, pivot columns)."""
    work = [list(map(Fraction, r)) for r in rows]
    if ncols is None:
        ncols = len(work[0]) if work else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(work)) if work[i][c] != 0), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        pv = work[r][c]
        if pv != 1:
            work[r] = [v / pv for v in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != 0:
                f = work[i][c]
                work[i] = [a - f * b for a, b in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    """Basis of {x : rows @ x = 0}, one vector per free column."""
    if not rows:
        return [unit(ncols, i) for i in range(ncols)]
    red, pivots = rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        x = [ZERO] * ncols
        x[f] = ONE
        for row, p in zip(red, pivots):
            x[p] = -row[f]
        basis.append(tuple(x))
    return basis


def solve(a: Sequence[Sequence], b: Sequence) -> Vector | None:
    """One solution of a @ x = b (free variables set to zero), or None."""
    n = len(a[0]) if a else 0
    aug = [list(row) + [rhs] for row, rhs in zip(a, b)]
    red, pivots = rref(aug, n + 1)
    if n in pivots:
        return None
    x = [ZERO] * n
    for row, p in zip(red, pivots):
        x[p] = row[n]
    return tuple(x)


def solve_unique(a: Sequence[Sequence], b: Sequence) -> Vector | None:
    """The solution of a @ x = b if it exists and is unique, else None."""
    n = len(a[0]) if a else 0
    if rank(a) < n:
        return None
    return solve(a, b)


# --- linear programs ------------------------------------------------------


def _row(coeffs, rhs, n):
    coeffs = vector(coeffs)
    if len(coeffs) != n:
        raise MalformedProgram(f"row of length {len(coeffs)} in a program with {n} variables")
    return coeffs, to_rational(rhs)


@dataclass(frozen=True)
class LinearProgram:
    """Variables x_0..x_{n-1}; equalities a.x = b; inequalities a.x >= b.

    Variables listed in ``nonneg`` are constrained to be nonnegative; all
    others are free.
    """

    n_vars: int
    equalities: tuple = ()
    inequalities: tuple = ()
    nonneg: frozenset = field(default_factory=frozenset)
    objective: Vector | None = None

    def __post_init__(self):
        n = self.n_vars
        if not isinstance(n, int) or n < 0:
            raise MalformedProgram("n_vars must be a nonnegative integer")
        object.__setattr__(self, "equalities", tuple(_row(a, b, n) for a, b in self.equalities))
        object.__setattr__(self, "inequalities", tuple(_row(a, b, n) for a, b in self.inequalities))
        nonneg = frozenset(self.nonneg)
        if any(not 0 <= j < n for j in nonneg):
            raise MalformedProgram("nonnegativity index out of range")
        object.__setattr__(self, "nonneg", nonneg)
        if self.objective is not None:
            obj = vector(self.objective)
            if len(obj) != n:
                raise MalformedProgram("objective length differs from n_vars")
            object.__setattr__(self, "objective", obj)

    @classmethod
    def build(cls, n_vars, *, eq=(), ge=(), le=(), nonneg=None, objective=None):
        """Convenience constructor; ``nonneg=None`` means all variables are nonnegative."""
        le_rows = [(tuple(-to_rational(v) for v in a), -to_rational(b)) for a, b in le]
        if nonneg is None:
            nonneg = range(n_vars)
        return cls(n_vars, tuple(eq), tuple(ge) + tuple(le_rows), frozenset(nonneg), objective)

    def with_objective(self, objective) -> "LinearProgram":
        return LinearProgram(self.n_vars, self.equalities, self.inequalities, self.nonneg, objective)

    def satisfied_by(self, x: Sequence, strict: Iterable[int] = ()) -> bool:
        strict = set(strict)
        if len(x) != self.n_vars:
            return False
        if any(x[j] < 0 for j in self.nonneg):
            return False
        if any(dot(a, x) != b for a, b in self.equalities):
            return False
        for i, (a, b) in enumerate(self.inequalities):
            v = dot(a, x)
            if v < b or (i in strict and v == b):
                return False
        return True


@dataclass(frozen=True)
class Certificate:
    """Multipliers proving that a linear system has no solution.

    With g = sum(eq_i * a_i) + sum(ineq_i * a_i) and s = the same combination
    of right-hand sides, the certificate is valid when ineq >= 0, g_j <= 0 on
    nonnegative variables, g_j = 0 on free ones, and either s > 0, or s >= 0
    and some strict inequality carries a positive multiplier.  Any solution x
    would give g.x >= s (strictly, in the second case) while g.x <= 0.
    """

    eq: Vector
    ineq: Vector

    def verify(self, lp: LinearProgram, strict: Iterable[int] = ()) -> bool:
        strict = set(strict)
        if len(self.eq) != len(lp.equalities) or len(self.ineq) != len(lp.inequalities):
            return False
        if any(v < 0 for v in self.ineq):
            return False
        g = [ZERO] * lp.n_vars
        s = ZERO
        for y, (a, b) in list(zip(self.eq, lp.equalities)) + list(zip(self.ineq, lp.inequalities)):
            if y:
                for j, aj in enumerate(a):
                    if aj:
                        g[j] += y * aj
                s += y * b
        for j in range(lp.n_vars):
            if j in lp.nonneg:
                if g[j] > 0:
                    return False
            elif g[j] != 0:
                return False
        if s > 0:
            return True
        return s == 0 and any(self.ineq[i] > 0 for i in strict)

    def as_dict(self) -> dict:
        return {
            "equality_multipliers": [format_rational(v) for v in self.eq],
            "inequality_multipliers": [format_rational(v) for v in self.ineq],
        }


@dataclass(frozen=True)
class LPResult:
    """Outcome of a feasibility or optimization call.

    ``status`` is one of ``"feasible"``, ``"optimal"``, ``"infeasible"`` or
    ``"unbounded"``.  ``x`` is set for feasible and optimal results, ``value``
    for optimal ones and ``certificate`` for infeasible ones.
    """

    status: str
    x: Vector | None = None
    value: Fraction | None = None
    certificate: Certificate | None = None

    @property
    def feasible(self) -> bool:
        return self.status in ("feasible", "optimal", "unbounded")


class _Tableau:
    """Dense tableau for: minimize obj.x subject to rows.x = rhs, x >= 0."""

    __slots__ = ("rows", "rhs", "basis", "obj", "obj_rhs")

    def __init__(self, rows, rhs, basis, obj=None, obj_rhs=_QZERO):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.obj = obj
        self.obj_rhs = obj_rhs

    def copy(self) -> "_Tableau":
        return _Tableau(
            [list(r) for r in self.rows],
            list(self.rhs),
            list(self.basis),
            None if self.obj is None else list(self.obj),
            self.obj_rhs,
        )

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        p = row[c]
        if p != 1:
            row = [v / p if v else v for v in row]
            self.rows[r] = row
            self.rhs[r] /= p
        nz = [j for j, v in enumerate(row) if v]
        br = self.rhs[r]
        for i, other in enumerate(self.rows):
            if i != r:
                f = other[c]
                if f:
                    for j in nz:
                        other[j] -= f * row[j]
                    self.rhs[i] -= f * br
        if self.obj is not None:
            f = self.obj[c]
            if f:
                for j in nz:
                    self.obj[j] -= f * row[j]
                self.obj_rhs -= f * br
        self.basis[r] = c

    def run(self, allowed: int) -> bool:
        """Bland-rule iterations over columns < allowed.  False when unbounded."""
        obj = self.obj
        while True:
            enter = -1
            for j in range(allowed):
                if obj[j] < 0:
                    enter = j
                    break
            if enter < 0:
                return True
            best = -1
            best_ratio = None
            for i, row in enumerate(self.rows):
                a = row[enter]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best < 0 or ratio < best_ratio or (
                        ratio == best_ratio and self.basis[i] < self.basis[best]
                    ):
                        best, best_ratio = i, ratio
            if best < 0:
                return False
            self.pivot(best, enter)

    def point(self, n: int) -> list:
        x = [ZERO] * n
        for i, b in enumerate(self.basis):
            x[b] = _out(self.rhs[i])
        return x


def _phase_one(a_rows: list[list], b: list, n: int) -> _Tableau | None:
    """Feasible basis of {x >= 0 : A x = b} with redundant rows removed, or None."""
    m = len(a_rows)
    rows, rhs = [], []
    for i in range(m):
        r = list(a_rows[i])
        bi = b[i]
        if bi < 0:
            r = [-v for v in r]
            bi = -bi
        art = [_QZERO] * m
        art[i] = _QONE
        rows.append(r + art)
        rhs.append(bi)
    obj = [_QZERO] * (n + m)
    for r in rows:
        for j in range(n):
            if r[j]:
                obj[j] -= r[j]
    t = _Tableau(rows, rhs, [n + i for i in range(m)], obj, -sum(rhs, _QZERO))
    t.run(n + m)
    if t.obj_rhs != 0:
        return None
    i = 0
    while i < len(t.rows):
        if t.basis[i] >= n:
            row = t.rows[i]
            j = next((j for j in range(n) if row[j] != 0), None)
            if j is None:
                del t.rows[i], t.rhs[i], t.basis[i]
                continue
            t.pivot(i, j)
        i += 1
    t.rows = [r[:n] for r in t.rows]
    t.obj = None
    return t


def _standard_form(lp: LinearProgram):
    """Rewrite lp over nonnegative variables with equality rows only."""
    split = []
    k = 0
    for j in range(lp.n_vars):
        if j in lp.nonneg:
            split.append(((k, 1),))
            k += 1
        else:
            split.append(((k, 1), (k + 1, -1)))
            k += 2
    n_struct = k
    n_total = n_struct + len(lp.inequalities)
    rows, rhs = [], []
    for i, (coeffs, b) in enumerate(lp.equalities + lp.inequalities):
        row = [_QZERO] * n_total
        for j, a in enumerate(coeffs):
            if a:
                qa = _Q(a)
                for col, sign in split[j]:
                    row[col] = qa if sign > 0 else -qa
        if i >= len(lp.equalities):
            row[n_struct + i - len(lp.equalities)] = -_QONE
        rows.append(row)
        rhs.append(_Q(b))
    return rows, rhs, n_total, split


def _unsplit(w, split) -> Vector:
    out = []
    for parts in split:
        v = ZERO
        for col, sign in parts:
            v = v + w[col] if sign > 0 else v - w[col]
        out.append(v)
    return tuple(out)


def _alternative_certificate(lp: LinearProgram, strict: frozenset) -> Certificate:
    """Solve the theorem-of-the-alternative system for an infeasible lp."""
    m_eq, m_in = len(lp.equalities), len(lp.inequalities)
    nv = m_eq + m_in
    rows = lp.equalities + lp.inequalities
    eq, ge = [], []
    for j in range(lp.n_vars):
        g = tuple(a[j] for a, _ in rows)
        if j in lp.nonneg:
            ge.append((tuple(-v for v in g), ZERO))
        else:
            eq.append((g, ZERO))
    rhs_row = tuple(b for _, b in rows)
    nonneg = frozenset(range(m_eq, nv))
    res = _feasible_point(LinearProgram(nv, tuple(eq) + ((rhs_row, ONE),), tuple(ge), nonneg))
    if res is None and strict:
        strict_row = tuple(ONE if i - m_eq in strict else ZERO for i in range(nv))
        res = _feasible_point(
            LinearProgram(nv, tuple(eq) + ((strict_row, ONE),), tuple(ge) + ((rhs_row, ZERO),), nonneg)
        )
    if res is not None:
        cert = Certificate(tuple(res[:m_eq]), tuple(res[m_eq:]))
        assert cert.verify(lp, strict)
        return cert
    raise AssertionError("infeasible program without an alternative certificate")


def _feasible_point(lp: LinearProgram) -> Vector | None:
    rows, rhs, n, split = _standard_form(lp)
    t = _phase_one(rows, rhs, n)
    if t is None:
        return None
    return _unsplit(t.point(n), split)


def solve_feasibility(lp: LinearProgram, strict: Iterable[int] = ()) -> LPResult:
    """Find a point of the program's feasible set.

    ``strict`` lists indices of inequalities that must hold strictly.  The
    strict case maximizes a common slack t (capped at 1) and reports
    infeasibility when the best slack is zero.
    """
    strict = frozenset(strict)
    if not strict:
        x = _feasible_point(lp)
        if x is None:
            return LPResult("infeasible", certificate=_alternative_certificate(lp, strict))
        return LPResult("feasible", x=x)
    n = lp.n_vars
    ineq = []
    for i, (a, b) in enumerate(lp.inequalities):
        ineq.append((a + ((-ONE,) if i in strict else (ZERO,)), b))
    ineq.append(((ZERO,) * n + (-ONE,), -ONE))
    lifted = LinearProgram(
        n + 1,
        tuple((a + (ZERO,), b) for a, b in lp.equalities),
        tuple(ineq),
        lp.nonneg | {n},
        (ZERO,) * n + (ONE,),
    )
    res = optimize(lifted, "max")
    if res.status == "optimal" and res.value > 0:
        return LPResult("feasible", x=res.x[:n])
    return LPResult("infeasible", certificate=_alternative_certificate(lp, strict))


def optimize(lp: LinearProgram, sense: str = "max") -> LPResult:
    """Optimize lp.objective exactly.  Ties are broken by Bland's rule."""
    if lp.objective is None:
        raise MalformedProgram("optimize needs an objective")
    if sense not in ("max", "min"):
        raise MalformedProgram(f"unknown sense {sense!r}")
    rows, rhs, n, split = _standard_form(lp)
    t = _phase_one(rows, rhs, n)
    if t is None:
        return LPResult("infeasible", certificate=_alternative_certificate(lp, frozenset()))
    sign = -1 if sense == "max" else 1
    cost = [_QZERO] * n
    for j, parts in enumerate(split):
        cj = _Q(lp.objective[j]) * sign
        for col, s in parts:
            cost[col] = cj if s > 0 else -cj
    obj = list(cost)
    obj_rhs = _QZERO
    for i, bi in enumerate(t.basis):
        f = obj[bi]
        if f:
            for j, a in enumerate(t.rows[i]):
                if a:
                    obj[j] -= f * a
            obj_rhs -= f * t.rhs[i]
    t.obj, t.obj_rhs = obj, obj_rhs
    if not t.run(n):
        return LPResult("unbounded")
    x = _unsplit(t.point(n), split)
    value = dot(lp.objective, x)
    return LPResult("optimal", x=x, value=value)


def enumerate_vertices(a: Sequence[Sequence], b: Sequence) -> list[Vector]:
    """Vertices of the polyhedron {x >= 0 : a @ x = b}, sorted.

    Walks the graph of feasible bases from the basis found in phase one,
    following every minimum-ratio pivot, so degenerate vertices are reached
    through all of their bases.
    """
    n = len(a[0]) if a else 0
    rows = [[_Q(to_rational(v)) for v in r] for r in a]
    t = _phase_one(rows, [_Q(to_rational(v)) for v in b], n)
    if t is None:
        return []
    seen = {frozenset(t.basis)}
    stack = [t]
    found = set()
    while stack:
        t = stack.pop()
        found.add(tuple(t.point(n)))
        basic = set(t.basis)
        for j in range(n):
            if j in basic:
                continue
            cands = [(t.rhs[i] / row[j], i) for i, row in enumerate(t.rows) if row[j] > 0]
            if not cands:
                continue
            low = min(r for r, _ in cands)
            for r, i in cands:
                if r != low:
                    continue
                key = frozenset(basic - {t.basis[i]} | {j})
                if key in seen:
                    continue
                seen.add(key)
                nxt = t.copy()
                nxt.pivot(i, j)
                stack.append(nxt)
    return sorted(found)
