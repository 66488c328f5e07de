import random
from fractions import Fraction as F

import pytest

from blo_auction import (brute_force_blo, brute_force_mrc, enumerate_core, is_in_core, max_core_utility,
                         solve_instance)
from blo_auction.core import rows_to_constraints, separate
from blo_auction.model import Allocation, UtilityVector, leximin_compare
from blo_auction.optimization import lp_solve
from blo_auction.winner_determination import OracleHandle, WdResult

from conftest import example1, small_random


def test_enumerate_example1_rows(ex1, ex1_wd):
    rows = {r.excluded_winners: r.rhs for r in enumerate_core(ex1, ex1_wd)}
    assert rows[frozenset({0, 1})] == 2
    assert rows[frozenset({1, 2})] == 2
    assert rows[frozenset({0, 1, 2})] == 4
    assert rows[frozenset({0})] == 2 and rows[frozenset({0, 2})] == 4


@pytest.mark.parametrize("pi, expected", [
    ((1, 1, 1, 0, 0), True),
    ((2, 0, 2, 0, 0), True),
    ((0, 0, 0, 0, 0), True),
    ((2, 2, 2, 0, 0), False),
    ((2, 1, 0, 0, 0), False),
])
def test_in_core_examples(ex1, ex1_wd, pi, expected):
    assert bool(is_in_core(ex1, ex1_wd, [F(p) for p in pi])) is expected


def test_in_core_rejects_out_of_caps(ex1, ex1_wd):
    with pytest.raises(ValueError):
        is_in_core(ex1, ex1_wd, [F(3), 0, 0, 0, 0])
    with pytest.raises(ValueError):
        is_in_core(ex1, ex1_wd, [F(-1), 0, 0, 0, 0])


def _explicit_in_core(inst, wd, pi):
    return all(sum(pi[i] for i in r.excluded_winners) <= r.rhs for r in enumerate_core(inst, wd))


@pytest.mark.parametrize("seed", range(80))
def test_separation_agrees_with_rows(seed):
    inst = small_random(seed)
    wd = solve_instance(inst)
    rng = random.Random(seed)
    for _ in range(6):
        pi = [F(rng.randint(0, 4 * int(wd.allocation.winning_value(inst, i))), 4) if i in wd.winners else F(0)
              for i in range(inst.num_bidders)]
        sep = is_in_core(inst, wd, pi)
        assert bool(sep) == _explicit_in_core(inst, wd, pi)
        if not sep:
            # the witness coalition really blocks
            assert sep.coalition_welfare > wd.welfare - sum(pi[i] for i in wd.winners - sep.witness)


@pytest.mark.parametrize("seed", range(60))
def test_max_core_utility_is_lp_max(seed):
    inst = small_random(seed)
    wd = solve_instance(inst)
    winners = sorted(wd.winners)
    cons = rows_to_constraints(enumerate_core(inst, wd), winners)
    for k, i in enumerate(winners):
        e = [F(int(j == k)) for j in range(len(winners))]
        assert lp_solve(e, "max", cons).objective == max_core_utility(inst, wd, i)


def test_max_core_utility_rejects_loser(ex1, ex1_wd):
    assert max_core_utility(ex1, ex1_wd, 1) == 2
    with pytest.raises(ValueError):
        max_core_utility(ex1, ex1_wd, 3)


def test_brute_force_example1(ex1, ex1_wd):
    assert brute_force_blo(ex1, ex1_wd).pi == (1, 1, 1, 0, 0)
    assert brute_force_mrc(ex1, ex1_wd).pi == (2, 0, 2, 0, 0)


def _core_points(inst, wd, cells=8):
    """Grid of core points, ``cells`` steps per winner (for checking leximin maximality)."""
    winners = sorted(wd.winners)
    caps = [wd.allocation.winning_value(inst, i) for i in winners]
    pts = [[]]
    for c in caps:
        pts = [p + [c * F(k, cells)] for p in pts for k in range(cells + 1)]
    for p in pts:
        pi = [F(0)] * inst.num_bidders
        for i, v in zip(winners, p):
            pi[i] = v
        if _explicit_in_core(inst, wd, pi):
            yield pi


@pytest.mark.parametrize("seed", [s for s in range(120) if 1 + (s // 6) % 6 <= 4][:40])
def test_blo_oracle_is_leximin_maximal_and_pareto(seed):
    inst = small_random(seed)
    wd = solve_instance(inst)
    blo = brute_force_blo(inst, wd)
    assert _explicit_in_core(inst, wd, blo.pi)
    w = sorted(wd.winners)
    mine = [blo[i] for i in w]
    for pi in _core_points(inst, wd):
        theirs = [pi[i] for i in w]
        assert leximin_compare(mine, theirs) >= 0
        # Pareto: no core point weakly dominates with a strict gain
        assert not (all(a >= b for a, b in zip(theirs, mine)) and theirs != mine)


@pytest.mark.parametrize("seed", range(30))
def test_blo_oracle_permutation_invariant(seed):
    inst = small_random(seed)
    wd = solve_instance(inst)
    order = list(range(inst.num_bidders))
    random.Random(seed).shuffle(order)
    perm = inst.permuted(order)
    # carry the same allocation over so both sides price the same outcome
    alloc = Allocation(tuple(wd.allocation.assigned[j] for j in order))
    pwd = WdResult(alloc.winners, alloc, wd.welfare)
    a = brute_force_blo(inst, wd)
    b = brute_force_blo(perm, pwd)
    assert tuple(a[j] for j in order) == b.pi


def test_separate_counts_one_query(ex1, ex1_wd):
    h = OracleHandle(ex1)
    sep = separate(h, ex1_wd, [F(2), F(2), F(2), 0, 0])
    assert h.queries == 1 and not sep
    # only one bridge fits once the singles are truncated to zero
    assert sep.witness == {3} and sep.truncated_welfare == 2 and sep.coalition_welfare == 2
