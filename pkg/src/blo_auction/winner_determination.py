"""Winner determination: exact welfare maximisation over XOR bid lists.

The search itself lives in a packing kernel. A compiled version
(``blo_auction._packing``) is used when it was built, otherwise the
pure-Python one; set ``BLO_AUCTION_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import itertools
import logging
import os
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Iterable, Sequence

from . import _packing_py
from .model import ZERO, Allocation, Bid, Instance, UtilityVector

log = logging.getLogger(__name__)

_compiled = None
if os.environ.get("BLO_AUCTION_PURE") != "1":
    try:
        from . import _packing as _compiled
    except ImportError:  # extension not built
        _compiled = None

KERNEL = "compiled" if _compiled is not None else "python"

BRUTE_FORCE_BUDGET = 25

BidProfile = Sequence[Sequence[Bid]]


@dataclass(frozen=True)
class WdResult:
    winners: frozenset[int]
    allocation: Allocation
    welfare: Fraction


def _flatten(bids: BidProfile, reverse_ties: bool):
    """Positive bids in tie-break order as ``(bidder, bid_index, bid)``."""
    flat = [(i, k, b) for i, lst in enumerate(bids) for k, b in enumerate(lst) if b.value > 0]
    if reverse_ties:
        flat.reverse()
    return flat


def _masks(flat, num_goods: int) -> list[int]:
    # real goods are bits 0..num_goods-1; bit num_goods+i is bidder i's XOR token.
    # Dummy goods are dropped: they only ever encode the per-bidder XOR.
    out = []
    for i, _, b in flat:
        m = 1 << (num_goods + i)
        for g in b.bundle:
            if g < num_goods:
                m |= 1 << g
        out.append(m)
    return out


def _result(bids: BidProfile, flat, chosen: Iterable[int]) -> WdResult:
    assigned: list[int | None] = [None] * len(bids)
    welfare = ZERO
    for j in chosen:
        i, k, b = flat[j]
        assigned[i] = k
        welfare += b.value
    alloc = Allocation(tuple(assigned))
    return WdResult(alloc.winners, alloc, welfare)


def _pack(masks, weights):
    if _compiled is not None:
        try:
            return _compiled.pack(masks, weights)
        except OverflowError:
            log.debug("weights overflow the compiled kernel; using the Python kernel")
    return _packing_py.pack(masks, weights)


def solve_wd(bids: BidProfile, num_goods: int, *, reverse_ties: bool = False) -> WdResult:
    """Welfare-optimal allocation of ``bids`` (one XOR bid list per bidder).

    Zero-valued bids are ignored. Ties go to the allocation whose sorted list
    of global bid ids (bidder-major order) is lexicographically smallest, or
    largest when ``reverse_ties`` is set.
    """
    flat = _flatten(bids, reverse_ties)
    if not flat:
        return _result(bids, flat, [])
    denom = lcm(*(b.value.denominator for _, _, b in flat))
    weights = [int(b.value * denom) for _, _, b in flat]
    _, chosen = _pack(_masks(flat, num_goods), weights)
    return _result(bids, flat, chosen)


def solve_wd_bruteforce(bids: BidProfile, num_goods: int, *, reverse_ties: bool = False) -> WdResult:
    """Exhaustive enumeration of feasible bid subsets (test oracle)."""
    flat = _flatten(bids, reverse_ties)
    if len(flat) > BRUTE_FORCE_BUDGET:
        raise ValueError(f"{len(flat)} bids exceed the enumeration budget of {BRUTE_FORCE_BUDGET}")
    masks = _masks(flat, num_goods)
    best_val, best_key = ZERO, ()

    def extend(start, used, val, picked):
        nonlocal best_val, best_key
        if val > best_val or (val == best_val and tuple(picked) < best_key):
            best_val, best_key = val, tuple(picked)
        for j in range(start, len(flat)):
            if not masks[j] & used:
                picked.append(j)
                extend(j + 1, used | masks[j], val + flat[j][2].value, picked)
                picked.pop()

    extend(0, 0, ZERO, [])
    return _result(bids, flat, best_key)


def restrict(inst: Instance, coalition: Iterable[int]) -> list[tuple[Bid, ...]]:
    keep = set(coalition)
    return [lst if i in keep else () for i, lst in enumerate(inst.bids)]


def truncate_bids(inst: Instance, pi_tilde: UtilityVector | Sequence[Fraction]) -> list[tuple[Bid, ...]]:
    """Each bid value ``b`` of bidder i becomes ``max(b - pi_tilde[i], 0)``; zeros are dropped."""
    out = []
    for i, lst in enumerate(inst.bids):
        p = pi_tilde[i]
        if p < 0:
            raise ValueError(f"negative truncation amount for bidder {i}")
        out.append(tuple(Bid(b.bundle, b.value - p) for b in lst if b.value > p))
    return out


class OracleHandle:
    """Counts WD queries made on one instance during one pricing run."""

    def __init__(self, inst: Instance, *, reverse_ties: bool = False, solver=None):
        self.instance = inst
        self.reverse_ties = reverse_ties
        self.queries = 0
        self._solver = solver or solve_wd

    def solve(self, bids: BidProfile) -> WdResult:
        self.queries += 1
        return self._solver(bids, self.instance.num_goods, reverse_ties=self.reverse_ties)

    def solve_instance(self) -> WdResult:
        return self.solve(self.instance.bids)

    def coalition_welfare(self, coalition: Iterable[int]) -> Fraction:
        return self.solve(restrict(self.instance, coalition)).welfare

    def truncated(self, pi_tilde) -> WdResult:
        return self.solve(truncate_bids(self.instance, pi_tilde))


def solve_instance(inst: Instance, *, reverse_ties: bool = False) -> WdResult:
    return solve_wd(inst.bids, inst.num_goods, reverse_ties=reverse_ties)


def coalition_welfare(inst: Instance, coalition: Iterable[int]) -> Fraction:
    """w(S): optimal welfare when only bidders in ``coalition`` take part."""
    return solve_wd(restrict(inst, coalition), inst.num_goods).welfare


def all_coalition_welfares(inst: Instance, bidders: Sequence[int]) -> dict[frozenset, Fraction]:
    """w(N \\ T) for every subset T of ``bidders`` (brute-force helper)."""
    everyone = set(range(inst.num_bidders))
    out = {}
    for r in range(len(bidders) + 1):
        for t in itertools.combinations(bidders, r):
            out[frozenset(t)] = coalition_welfare(inst, everyone - set(t))
    return out
