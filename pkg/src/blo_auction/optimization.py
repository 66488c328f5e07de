"""Exact rational LP and Euclidean projection on small polytopes.

Every variable is implicitly nonnegative. Both solvers work on
:class:`fractions.Fraction` data and return exact answers; they are sized for
the handful of winners in a desk-scale auction, not for general use.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
MAX_DIMENSION = 64

LE, EQ, GE = "<=", "==", ">="


@dataclass(frozen=True)
class LinearConstraint:
    coefficients: tuple[Fraction, ...]
    relation: str
    rhs: Fraction

    def __post_init__(self):
        if self.relation not in (LE, EQ, GE):
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coefficients", tuple(Fraction(c) for c in self.coefficients))
        object.__setattr__(self, "rhs", Fraction(self.rhs))

    def lhs(self, x: Sequence[Fraction]) -> Fraction:
        return sum((a * v for a, v in zip(self.coefficients, x) if a), ZERO)

    def satisfied(self, x: Sequence[Fraction]) -> bool:
        v = self.lhs(x)
        if self.relation == LE:
            return v <= self.rhs
        if self.relation == GE:
            return v >= self.rhs
        return v == self.rhs


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    point: tuple[Fraction, ...] | None = None
    objective: Fraction | None = None


class InfeasibleError(ValueError):
    pass


def _as_le_rows(constraints: Sequence[LinearConstraint], n: int):
    rows = []
    for c in constraints:
        if len(c.coefficients) != n:
            raise ValueError("constraint dimension mismatch")
        a = list(c.coefficients)
        if c.relation in (LE, EQ):
            rows.append((a, c.rhs))
        if c.relation in (GE, EQ):
            rows.append(([-v for v in a], -c.rhs))
    return rows


class _Dictionary:
    """Simplex dictionary ``x_B = b - A x_N``, ``z = z0 + c x_N`` with Bland's rule."""

    def __init__(self, A, b, c, basic, nonbasic):
        self.A, self.b, self.c = A, b, c
        self.z0 = ZERO
        self.basic, self.nonbasic = basic, nonbasic

    def pivot(self, r: int, j: int) -> None:
        A, b, c = self.A, self.b, self.c
        row = A[r]
        p = row[j]
        inv = 1 / p
        new_row = [v * inv for v in row]
        new_row[j] = inv
        br = b[r] * inv
        for k in range(len(A)):
            if k == r:
                continue
            f = A[k][j]
            if f:
                rk = A[k]
                for col in range(len(rk)):
                    if col == j:
                        rk[col] = -f * inv
                    elif new_row[col]:
                        rk[col] -= f * new_row[col]
                b[k] -= f * br
        f = c[j]
        if f:
            for col in range(len(c)):
                if col == j:
                    c[col] = -f * inv
                elif new_row[col]:
                    c[col] -= f * new_row[col]
            self.z0 += f * br
        A[r], b[r] = new_row, br
        self.basic[r], self.nonbasic[j] = self.nonbasic[j], self.basic[r]

    def run(self) -> str:
        while True:
            entering = None
            for j, lab in enumerate(self.nonbasic):
                if self.c[j] > 0 and (entering is None or lab < self.nonbasic[entering]):
                    entering = j
            if entering is None:
                return "optimal"
            leave, best = None, None
            for r, row in enumerate(self.A):
                a = row[entering]
                if a > 0:
                    ratio = self.b[r] / a
                    if best is None or ratio < best or (ratio == best and self.basic[r] < self.basic[leave]):
                        leave, best = r, ratio
            if leave is None:
                return "unbounded"
            self.pivot(leave, entering)


def lp_solve(objective: Sequence, sense: str, constraints: Sequence[LinearConstraint]) -> LpSolution:
    """Optimise ``objective . x`` over ``{x >= 0} ∩ constraints`` exactly.

    ``sense`` is ``"max"`` or ``"min"``. Uses a two-phase dictionary simplex
    with Bland's rule, so degenerate core polytopes cannot make it cycle.
    """
    n = len(objective)
    if n > MAX_DIMENSION:
        raise ValueError(f"dimension {n} exceeds the LP budget of {MAX_DIMENSION}")
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    obj = [Fraction(v) for v in objective]
    cvec = obj if sense == "max" else [-v for v in obj]
    rows = _as_le_rows(constraints, n)
    m = len(rows)
    A = [list(a) for a, _ in rows]
    b = [rhs for _, rhs in rows]
    # labels: structural 0..n-1, slacks n..n+m-1, auxiliary n+m
    basic = list(range(n, n + m))

    if any(v < 0 for v in b):
        aux = n + m
        d = _Dictionary([row + [Fraction(-1)] for row in A], b,
                        [ZERO] * n + [Fraction(-1)], basic, list(range(n)) + [aux])
        r0 = min(range(m), key=lambda r: (d.b[r], d.basic[r]))
        d.pivot(r0, n)
        d.run()
        if d.z0 < 0:
            return LpSolution("infeasible")
        if aux in d.basic:
            r = d.basic.index(aux)
            j = next(j for j, v in enumerate(d.A[r]) if v)
            d.pivot(r, j)
        j_aux = d.nonbasic.index(aux)
        for row in d.A:
            del row[j_aux]
        del d.nonbasic[j_aux]
        A, b, basic, nonbasic = d.A, d.b, d.basic, d.nonbasic
    else:
        nonbasic = list(range(n))

    # express the real objective in the current nonbasic variables
    c = [ZERO] * len(nonbasic)
    z0 = ZERO
    for j, lab in enumerate(nonbasic):
        if lab < n:
            c[j] += cvec[lab]
    for r, lab in enumerate(basic):
        if lab < n and cvec[lab]:
            z0 += cvec[lab] * b[r]
            for j in range(len(nonbasic)):
                c[j] -= cvec[lab] * A[r][j]
    d = _Dictionary(A, b, c, basic, nonbasic)
    d.z0 = z0
    status = d.run()
    if status == "unbounded":
        return LpSolution("unbounded")
    x = [ZERO] * n
    for r, lab in enumerate(d.basic):
        if lab < n:
            x[lab] = d.b[r]
    value = sum((o * v for o, v in zip(obj, x)), ZERO)
    return LpSolution("optimal", tuple(x), value)


def _solve_linear(M: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Gauss-Jordan on a nonsingular square system."""
    k = len(M)
    aug = [list(M[i]) + [rhs[i]] for i in range(k)]
    for col in range(k):
        piv = next(r for r in range(col, k) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [a - f * p for a, p in zip(aug[r], aug[col])]
    return [aug[i][k] for i in range(k)]


def _independent(candidate: list[Fraction], basis: list[list[Fraction]]) -> bool:
    # basis is an echelon form of the rows accepted so far
    v = list(candidate)
    for piv_row in basis:
        lead = next(i for i, a in enumerate(piv_row) if a)
        if v[lead]:
            f = v[lead] / piv_row[lead]
            v = [a - f * p for a, p in zip(v, piv_row)]
    if any(v):
        basis.append(v)
        return True
    return False


def _dot(a, x):
    return sum((p * q for p, q in zip(a, x) if p), ZERO)


def min_sq_distance(ref: Sequence, constraints: Sequence[LinearConstraint],
                    extra_equalities: Sequence[LinearConstraint] = ()) -> tuple[Fraction, ...]:
    """Exact Euclidean projection of ``ref`` onto ``{x >= 0} ∩ constraints ∩ extra_equalities``.

    Primal active-set method started from an LP vertex; each equality-constrained
    subproblem is solved through its KKT system in rational arithmetic.
    """
    n = len(ref)
    ref = [Fraction(v) for v in ref]
    allc = list(constraints) + list(extra_equalities)
    start = lp_solve([ZERO] * n, "max", allc)
    if start.status != "optimal":
        raise InfeasibleError("projection onto an empty region")

    eq_rows, ineq_rows = [], []
    for c in allc:
        a = list(c.coefficients)
        if c.relation == EQ:
            eq_rows.append((a, c.rhs))
        elif c.relation == LE:
            ineq_rows.append((a, c.rhs))
        else:
            ineq_rows.append(([-v for v in a], -c.rhs))
    for i in range(n):
        e = [ZERO] * n
        e[i] = Fraction(-1)
        ineq_rows.append((e, ZERO))

    x = list(start.point)
    basis: list[list[Fraction]] = []
    working_eq = [k for k, (a, _) in enumerate(eq_rows) if _independent(a, basis)]
    working = [k for k, (a, rhs) in enumerate(ineq_rows) if _dot(a, x) == rhs and _independent(a, basis)]

    for _ in range(10_000):
        rows = [eq_rows[k] for k in working_eq] + [ineq_rows[k] for k in working]
        if rows:
            G = [[_dot(ai, aj) for aj, _ in rows] for ai, _ in rows]
            r = [_dot(a, ref) - rhs for a, rhs in rows]
            lam = _solve_linear(G, r)
        else:
            lam = []
        target = list(ref)
        for (a, _), l in zip(rows, lam):
            if l:
                for i in range(n):
                    target[i] -= l * a[i]
        p = [t - v for t, v in zip(target, x)]
        if not any(p):
            ineq_lam = lam[len(working_eq):]
            worst = None
            for pos, (k, l) in enumerate(zip(working, ineq_lam)):
                if l < 0 and (worst is None or l < ineq_lam[worst] or
                              (l == ineq_lam[worst] and k < working[worst])):
                    worst = pos
            if worst is None:
                return tuple(x)
            del working[worst]
            continue
        alpha, blocking = Fraction(1), None
        active = set(working)
        for k, (a, rhs) in enumerate(ineq_rows):
            if k in active:
                continue
            ap = _dot(a, p)
            if ap > 0:
                step = (rhs - _dot(a, x)) / ap
                if step < alpha or (step == alpha and blocking is not None and k < blocking):
                    alpha, blocking = step, k
        x = [v + alpha * d for v, d in zip(x, p)]
        if blocking is not None:
            working.append(blocking)
    raise RuntimeError("active-set iteration limit reached")


def sq_distance(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return sum(((p - q) ** 2 for p, q in zip(a, b)), ZERO)
