"""Payment rules: pay-as-bid, VCG, MRC (core constraint generation), the two
quadratic MRC variants, Fast Core, and the exact bidder-leximin-optimal rule.

Every rule takes the instance and a precomputed efficient allocation and
returns a :class:`~blo_auction.model.PaymentOutcome`. Oracle query counts
include the one WD solve that produced the allocation.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .core import lex_smallest_optimum, separate
from .model import ZERO, Instance, OracleStats, PaymentOutcome, UtilityVector, make_outcome
from .optimization import EQ, LE, LinearConstraint, lp_solve, min_sq_distance
from .winner_determination import OracleHandle, WdResult

log = logging.getLogger(__name__)

RULES = ("payasbid", "vcg", "mrc", "mrc-vcg", "mrc-zero", "fastcore", "blo")


@dataclass(frozen=True)
class StoredConstraint:
    frozen_set: frozenset[int]
    bound: Fraction


@dataclass
class WaterfillState:
    wd: WdResult
    handle: OracleHandle
    pi: list[Fraction]
    active: frozenset[int]
    step: int = 1
    last_increment: Fraction = ZERO
    store: list[StoredConstraint] = field(default_factory=list)
    reuse: bool = True


class CoreInvariantError(AssertionError):
    pass


def _stats(handle: OracleHandle, per_call=()) -> OracleStats:
    return OracleStats(handle.queries + 1, tuple(per_call))


def pay_as_bid(inst: Instance, wd: WdResult) -> PaymentOutcome:
    return make_outcome("payasbid", inst, wd.allocation, UtilityVector.zeros(inst.num_bidders),
                        OracleStats(1))


def _vcg_utilities(inst: Instance, wd: WdResult, handle: OracleHandle) -> dict[int, Fraction]:
    everyone = set(range(inst.num_bidders))
    return {i: wd.welfare - handle.coalition_welfare(everyone - {i}) for i in sorted(wd.winners)}


def vcg(inst: Instance, wd: WdResult, *, reverse_ties: bool = False) -> PaymentOutcome:
    handle = OracleHandle(inst, reverse_ties=reverse_ties)
    pi = UtilityVector.from_mapping(inst.num_bidders, _vcg_utilities(inst, wd, handle))
    return make_outcome("vcg", inst, wd.allocation, pi, _stats(handle))


# ---------------------------------------------------------------- MRC via CCG

def _unit_row(winners: Sequence[int], members, rhs) -> LinearConstraint:
    return LinearConstraint(tuple(Fraction(1) if i in members else ZERO for i in winners), LE, rhs)


def _full(inst: Instance, winners: Sequence[int], point) -> tuple[Fraction, ...]:
    pi = [ZERO] * inst.num_bidders
    for i, v in zip(winners, point):
        pi[i] = v
    return tuple(pi)


def _ccg(inst: Instance, wd: WdResult, handle: OracleHandle, seed_vcg: bool = False):
    """Core constraint generation. Returns ``(rows, total, point)`` where
    ``point`` is the lex-smallest MRC vertex in winner order."""
    winners = sorted(wd.winners)
    n = len(winners)
    if n == 0:
        return [], ZERO, ()
    rows = [_unit_row(winners, {i}, wd.allocation.winning_value(inst, i)) for i in winners]
    if seed_vcg:
        rows += [_unit_row(winners, {i}, u) for i, u in _vcg_utilities(inst, wd, handle).items()]
    ones = [Fraction(1)] * n
    lex = False  # only pick the lex-smallest vertex once the LP optimum is in the core
    while True:
        sol = lp_solve(ones, "max", rows)
        point = lex_smallest_optimum(n, rows, ones, sol.objective) if lex else sol.point
        sep = separate(handle, wd, _full(inst, winners, point))
        if sep.in_core:
            if lex:
                return rows, sol.objective, point
            lex = True
            continue
        excluded = wd.winners - sep.witness
        rows.append(_unit_row(winners, excluded, wd.welfare - sep.coalition_welfare))
        log.debug("ccg: cut %s <= %s", sorted(excluded), wd.welfare - sep.coalition_welfare)


def mrc_ccg(inst: Instance, wd: WdResult, *, seed_vcg: bool = False,
            reverse_ties: bool = False) -> PaymentOutcome:
    """Minimum-revenue core point (lex-smallest among ties) by constraint generation.

    The row set starts from the per-winner caps; ``seed_vcg`` additionally
    seeds it with the VCG utilities, at the price of |W| extra queries.
    """
    handle = OracleHandle(inst, reverse_ties=reverse_ties)
    winners = sorted(wd.winners)
    _, _, point = _ccg(inst, wd, handle, seed_vcg)
    pi = UtilityVector(_full(inst, winners, point))
    return make_outcome("mrc", inst, wd.allocation, pi, _stats(handle))


def mrc_quadratic(inst: Instance, wd: WdResult, ref: str = "vcg", *,
                  reverse_ties: bool = False) -> PaymentOutcome:
    """MRC point nearest (in l2) to the VCG point or to the origin."""
    if ref not in ("vcg", "zero"):
        raise ValueError("ref must be 'vcg' or 'zero'")
    handle = OracleHandle(inst, reverse_ties=reverse_ties)
    winners = sorted(wd.winners)
    rows, total, _ = _ccg(inst, wd, handle)
    if not winners:
        return make_outcome(f"mrc-{ref}", inst, wd.allocation,
                            UtilityVector.zeros(inst.num_bidders), _stats(handle))
    if ref == "vcg":
        vcg_u = _vcg_utilities(inst, wd, handle)
        target = [vcg_u[i] for i in winners]
    else:
        target = [ZERO] * len(winners)
    face = [LinearConstraint((Fraction(1),) * len(winners), EQ, total)]
    while True:
        point = min_sq_distance(target, rows, face)
        sep = separate(handle, wd, _full(inst, winners, point))
        if sep.in_core:
            break
        rows.append(_unit_row(winners, wd.winners - sep.witness, wd.welfare - sep.coalition_welfare))
    pi = UtilityVector(_full(inst, winners, point))
    return make_outcome(f"mrc-{ref}", inst, wd.allocation, pi, _stats(handle))


# ------------------------------------------------------------- water-filling

def cgs_search(state: WaterfillState) -> tuple[Fraction, frozenset[int]]:
    """Largest uniform increment for the active winners and the winners it freezes.

    Starts from the tightest stored bound (rescaled to the current step) or,
    failing that, from the bound of the empty coalition. Each failed
    separation query yields the bound of the most violated coalition B, which
    strictly shrinks the frozen set, so at most ``len(active)`` queries run.
    """
    active = state.active
    welfare = state.wd.welfare
    bound, frozen = None, None
    if state.reuse:
        kept = []
        for c in state.store:
            inter = c.frozen_set & active
            if not inter:
                continue
            b = Fraction(len(c.frozen_set), len(inter)) * (c.bound - state.last_increment)
            if b < 0:
                log.debug("cgs: dropping stale bound %s for %s", b, sorted(inter))
                continue
            if bound is None or b < bound:
                bound, frozen = b, inter
            kept.append(StoredConstraint(inter, b))
        state.store = kept
    if bound is None:
        bound = (welfare - sum(state.pi, ZERO)) / len(active)
        frozen = active

    while True:
        probe = [p + bound if i in active else p for i, p in enumerate(state.pi)]
        res = state.handle.truncated(probe)
        gap = welfare - sum(probe, ZERO)
        log.debug("cgs t=%d: bound=%s frozen=%s w_B=%s", state.step, bound, sorted(frozen), res.welfare)
        if res.welfare == gap:
            break
        frozen = active - res.winners
        bound -= (res.welfare - gap) / len(frozen)
        if state.reuse:
            state.store.append(StoredConstraint(frozen, bound))
        if len(frozen) == 1:
            break
    if bound < 0:
        raise CoreInvariantError(f"negative increment {bound}")
    return bound, frozen


def waterfill(inst: Instance, wd: WdResult, *, reuse: bool = True, reverse_ties: bool = False,
              check_core: bool = False) -> tuple[UtilityVector, OracleStats, list[tuple]]:
    """Run water-filling with CGS; returns utilities, query stats and a per-step trace."""
    handle = OracleHandle(inst, reverse_ties=reverse_ties)
    state = WaterfillState(wd, handle, [ZERO] * inst.num_bidders, frozenset(wd.winners), reuse=reuse)
    per_call, trace = [], []
    while state.active:
        before = handle.queries
        delta, frozen = cgs_search(state)
        per_call.append(handle.queries - before)
        trace.append((len(state.active), delta, frozenset(frozen)))
        for i in state.active:
            state.pi[i] += delta
        if not frozen or not frozen <= state.active:
            raise CoreInvariantError("frozen set must be a nonempty subset of the active set")
        state.active = state.active - frozen
        state.last_increment = delta
        state.step += 1
        if check_core and not separate(OracleHandle(inst), wd, state.pi):
            raise CoreInvariantError(f"step {state.step - 1} left the core: {state.pi}")
    return UtilityVector(state.pi), _stats(handle, per_call), trace


def blo_wf_cgs_cr(inst: Instance, wd: WdResult, *, reuse: bool = True, reverse_ties: bool = False,
                  check_core: bool = False) -> PaymentOutcome:
    """Exact bidder-leximin-optimal core outcome (constraint reuse on by default)."""
    pi, stats, _ = waterfill(inst, wd, reuse=reuse, reverse_ties=reverse_ties, check_core=check_core)
    return make_outcome("blo" if reuse else "blo-noreuse", inst, wd.allocation, pi, stats)


def fast_core(inst: Instance, wd: WdResult, epsilon=Fraction(1, 100), *,
              reverse_ties: bool = False) -> PaymentOutcome:
    """Approximate water-filling: bisection on the increment with a core predicate.

    The feasible end of each bracket is taken, so the result is always in the
    core; winners outside the violating coalition found at the infeasible end
    are frozen.
    """
    epsilon = Fraction(epsilon)
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    handle = OracleHandle(inst, reverse_ties=reverse_ties)
    pi = [ZERO] * inst.num_bidders
    active = frozenset(wd.winners)
    per_call = []

    def probe(step):
        return separate(handle, wd, [p + step if i in active else p for i, p in enumerate(pi)])

    while active:
        before = handle.queries
        lo, hi = ZERO, (wd.welfare - sum(pi, ZERO)) / len(active)
        sep = probe(hi)
        if sep.in_core:
            lo, frozen = hi, active
        else:
            witness = sep.witness
            while hi - lo > epsilon:
                mid = (lo + hi) / 2
                sep = probe(mid)
                if sep.in_core:
                    lo = mid
                else:
                    hi, witness = mid, sep.witness
            frozen = active - witness
        per_call.append(handle.queries - before)
        for i in active:
            pi[i] += lo
        active = active - frozen
    return make_outcome("fastcore", inst, wd.allocation, UtilityVector(pi), _stats(handle, per_call))


def price(inst: Instance, wd: WdResult, rule: str, *, epsilon=Fraction(1, 100),
          reverse_ties: bool = False) -> PaymentOutcome:
    """Dispatch by rule name (see ``RULES``)."""
    if rule == "payasbid":
        return pay_as_bid(inst, wd)
    if rule == "vcg":
        return vcg(inst, wd, reverse_ties=reverse_ties)
    if rule == "mrc":
        return mrc_ccg(inst, wd, reverse_ties=reverse_ties)
    if rule == "mrc-vcg":
        return mrc_quadratic(inst, wd, "vcg", reverse_ties=reverse_ties)
    if rule == "mrc-zero":
        return mrc_quadratic(inst, wd, "zero", reverse_ties=reverse_ties)
    if rule == "fastcore":
        return fast_core(inst, wd, epsilon, reverse_ties=reverse_ties)
    if rule == "blo":
        return blo_wf_cgs_cr(inst, wd, reverse_ties=reverse_ties)
    if rule == "blo-noreuse":
        return blo_wf_cgs_cr(inst, wd, reuse=False, reverse_ties=reverse_ties)
    raise ValueError(f"unknown rule {rule!r}; expected one of {', '.join(RULES)}")

