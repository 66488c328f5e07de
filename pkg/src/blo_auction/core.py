"""Core constraints, separation, and brute-force MRC / BLO reference solvers.

The enumeration-based functions here are oracles for testing the fast
payment rules. They materialise one row per subset of excluded winners and
therefore refuse instances with more than ``ENUMERATION_BUDGET`` winners.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import ZERO, Instance, UtilityVector
from .optimization import EQ, GE, LE, LinearConstraint, lp_solve
from .winner_determination import OracleHandle, WdResult, coalition_welfare

ENUMERATION_BUDGET = 12


@dataclass(frozen=True)
class CoreConstraintRow:
    """``sum(pi[i] for i in excluded_winners) <= rhs`` with ``rhs = w(N) - w(S)``."""

    excluded_winners: frozenset[int]
    rhs: Fraction
    source_coalition: frozenset[int]


@dataclass(frozen=True)
class Separation:
    in_core: bool
    witness: frozenset[int]  # winner set B of the truncated profile
    truncated_welfare: Fraction  # w_B
    coalition_welfare: Fraction  # w(B), untruncated

    def __bool__(self):
        return self.in_core


def _winners(wd: WdResult) -> list[int]:
    return sorted(wd.winners)


def enumerate_core(inst: Instance, wd: WdResult) -> list[CoreConstraintRow]:
    """One row per nonempty set T of excluded winners, with S = N \\ T.

    Coalitions that keep every winner constrain nothing and are skipped.
    Nonnegativity is left to :func:`rows_to_constraints`.
    """
    winners = _winners(wd)
    if len(winners) > ENUMERATION_BUDGET:
        raise ValueError(f"{len(winners)} winners exceed the enumeration budget of {ENUMERATION_BUDGET}")
    everyone = frozenset(range(inst.num_bidders))
    rows = []
    for r in range(1, len(winners) + 1):
        for t in itertools.combinations(winners, r):
            s = everyone - frozenset(t)
            rows.append(CoreConstraintRow(frozenset(t), wd.welfare - coalition_welfare(inst, s), s))
    return rows


def rows_to_constraints(rows: Sequence[CoreConstraintRow], winners: Sequence[int],
                        extra_vars: int = 0) -> list[LinearConstraint]:
    """LP rows over the winners' utilities (in ``winners`` order).

    Variables are nonnegative inside the LP, which covers individual rationality.
    """
    pos = {w: k for k, w in enumerate(winners)}
    out = []
    for row in rows:
        a = [ZERO] * (len(winners) + extra_vars)
        for i in row.excluded_winners:
            a[pos[i]] = Fraction(1)
        out.append(LinearConstraint(tuple(a), LE, row.rhs))
    return out


def separate(handle: OracleHandle, wd: WdResult, pi: Sequence[Fraction]) -> Separation:
    """One WD query on the truncated profile decides core membership.

    ``w_B >= w(N) - sum(pi)`` always holds; equality means no coalition can
    block. On failure the truncated winner set B is a most-violated coalition,
    and ``w(B) = w_B + sum(pi[i] for i in B)``.
    """
    res = handle.truncated(pi)
    slack_total = wd.welfare - sum(pi, ZERO)
    w_b = res.welfare
    return Separation(w_b == slack_total, res.winners, w_b,
                      w_b + sum((pi[i] for i in res.winners), ZERO))


def check_caps(inst: Instance, wd: WdResult, pi: Sequence[Fraction]) -> None:
    for i, p in enumerate(pi):
        cap = wd.allocation.winning_value(inst, i)
        if p < 0 or p > cap:
            raise ValueError(f"utility {p} of bidder {i} outside [0, {cap}]")


def is_in_core(inst: Instance, wd: WdResult, pi, handle: OracleHandle | None = None) -> Separation:
    pi = pi.pi if isinstance(pi, UtilityVector) else tuple(pi)
    check_caps(inst, wd, pi)
    return separate(handle or OracleHandle(inst), wd, pi)


def max_core_utility(inst: Instance, wd: WdResult, i: int) -> Fraction:
    """Largest utility bidder ``i`` can get in the core: ``w(N) - w(N \\ {i})``."""
    if i not in wd.winners:
        raise ValueError(f"bidder {i} is not a winner")
    return wd.welfare - coalition_welfare(inst, set(range(inst.num_bidders)) - {i})


def _expand(inst: Instance, winners: Sequence[int], point: Sequence[Fraction]) -> UtilityVector:
    return UtilityVector.from_mapping(inst.num_bidders, dict(zip(winners, point)))


def lex_smallest_optimum(n: int, constraints: list[LinearConstraint], objective: Sequence[Fraction],
                         value: Fraction) -> tuple[Fraction, ...]:
    """Lexicographically smallest point on the face ``objective . x = value``."""
    fixed = list(constraints) + [LinearConstraint(tuple(objective), EQ, value)]
    point = None
    for k in range(n):
        e = [ZERO] * n
        e[k] = Fraction(1)
        sol = lp_solve(e, "min", fixed)
        assert sol.status == "optimal"
        point = sol.point
        fixed.append(LinearConstraint(tuple(e), EQ, sol.objective))
    return point if point is not None else ()


def brute_force_mrc(inst: Instance, wd: WdResult) -> UtilityVector:
    """Max total utility over the enumerated core; ties go to the lex-smallest vertex."""
    winners = _winners(wd)
    n = len(winners)
    cons = rows_to_constraints(enumerate_core(inst, wd), winners)
    ones = [Fraction(1)] * n
    sol = lp_solve(ones, "max", cons)
    assert sol.status == "optimal"
    return _expand(inst, winners, lex_smallest_optimum(n, cons, ones, sol.objective))


def brute_force_blo(inst: Instance, wd: WdResult, rows: Sequence[CoreConstraintRow] | None = None) -> UtilityVector:
    """Iterative max-min over the explicit core.

    Each round maximises the common floor ``t`` of the unfrozen winners, then
    freezes exactly those that cannot exceed ``t`` while the rest stay at
    least ``t`` (one auxiliary LP per unfrozen winner).
    """
    winners = _winners(wd)
    n = len(winners)
    if rows is None:
        rows = enumerate_core(inst, wd)
    base = rows_to_constraints(rows, winners, extra_vars=1)
    frozen: dict[int, Fraction] = {}

    def unit(k, v=Fraction(1)):
        a = [ZERO] * (n + 1)
        a[k] = v
        return a

    while len(frozen) < n:
        cons = list(base)
        for k, val in frozen.items():
            cons.append(LinearConstraint(tuple(unit(k)), EQ, val))
        for k in range(n):
            if k not in frozen:
                a = unit(k)
                a[n] = Fraction(-1)
                cons.append(LinearConstraint(tuple(a), GE, ZERO))
        sol = lp_solve(unit(n), "max", cons)
        assert sol.status == "optimal"
        t = sol.objective
        floor = cons + [LinearConstraint(tuple(unit(n)), EQ, t)]
        newly = []
        for k in range(n):
            if k in frozen:
                continue
            best = lp_solve(unit(k), "max", floor)
            if best.objective == t:
                newly.append(k)
        assert newly, "leximin round froze nobody"
        for k in newly:
            frozen[k] = t
    return _expand(inst, winners, [frozen[k] for k in range(n)])
