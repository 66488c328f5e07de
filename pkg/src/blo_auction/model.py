"""Domain types: instances, allocations, utility vectors and payment outcomes.

All money is held as :class:`fractions.Fraction`. Nothing in the pricing path
rounds; decimal strings are parsed as exact decimal fractions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

ZERO = Fraction(0)


class InvariantError(ValueError):
    """A value violates a documented invariant of a domain type."""


def to_fraction(value) -> Fraction:
    """Exact conversion; strings like ``"12.75"`` become ``51/4``.

    Floats are rejected because their binary expansion is rarely what the
    caller meant.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a monetary value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"refusing inexact float {value!r}; pass a string or Fraction")
    return Fraction(value)


def format_fraction(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class Bid:
    bundle: frozenset[int]
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "bundle", frozenset(self.bundle))
        object.__setattr__(self, "value", to_fraction(self.value))


@dataclass(frozen=True)
class Instance:
    """Goods ``0..num_goods-1`` are real, the next ``num_dummy`` are dummy goods.

    ``bids[i]`` is bidder ``i``'s XOR bid list. A bidder's bids are mutually
    exclusive whether or not they share a dummy good.
    """

    num_goods: int
    num_dummy: int
    bids: tuple[tuple[Bid, ...], ...]

    def __post_init__(self):
        bids = tuple(tuple(b if isinstance(b, Bid) else Bid(*b) for b in lst) for lst in self.bids)
        object.__setattr__(self, "bids", bids)
        self.validate()

    def validate(self) -> None:
        if self.num_goods < 0 or self.num_dummy < 0:
            raise InvariantError("good counts must be nonnegative")
        total = self.num_goods + self.num_dummy
        dummy_owner: dict[int, int] = {}
        for i, lst in enumerate(self.bids):
            for b in lst:
                if not b.bundle:
                    raise InvariantError(f"bidder {i} has an empty bundle")
                if b.value < 0:
                    raise InvariantError(f"bidder {i} has a negative bid value")
                for g in b.bundle:
                    if not 0 <= g < total:
                        raise InvariantError(f"bidder {i} references good {g} outside [0, {total})")
                    if g >= self.num_goods and dummy_owner.setdefault(g, i) != i:
                        raise InvariantError(f"dummy good {g} shared by bidders {dummy_owner[g]} and {i}")

    @property
    def num_bidders(self) -> int:
        return len(self.bids)

    @property
    def num_bids(self) -> int:
        return sum(len(lst) for lst in self.bids)

    def real_bundle(self, bidder: int, bid_index: int) -> frozenset[int]:
        return frozenset(g for g in self.bids[bidder][bid_index].bundle if g < self.num_goods)

    def value_of(self, bidder: int, goods: Iterable[int]) -> Fraction:
        """XOR valuation with free disposal over real goods; 0 for the empty set."""
        have = frozenset(g for g in goods if g < self.num_goods)
        best = ZERO
        for k, b in enumerate(self.bids[bidder]):
            if self.real_bundle(bidder, k) <= have and b.value > best:
                best = b.value
        return best

    def with_bidder_bids(self, bidder: int, new_bids: Sequence[Bid]) -> "Instance":
        """Copy with ``bidder``'s bid list replaced (dummy goods are re-used or dropped)."""
        if not 0 <= bidder < self.num_bidders:
            raise IndexError(f"no bidder {bidder}")
        bids = list(self.bids)
        bids[bidder] = tuple(new_bids)
        return Instance(self.num_goods, self.num_dummy, tuple(bids))

    def permuted(self, order: Sequence[int]) -> "Instance":
        """New instance whose bidder ``k`` is this instance's bidder ``order[k]``."""
        return Instance(self.num_goods, self.num_dummy, tuple(self.bids[j] for j in order))


@dataclass(frozen=True)
class Allocation:
    """``assigned[i]`` is the index into ``bids[i]`` of bidder i's winning bid, or None."""

    assigned: tuple[int | None, ...]

    @property
    def winners(self) -> frozenset[int]:
        return frozenset(i for i, a in enumerate(self.assigned) if a is not None)

    def check(self, inst: Instance) -> None:
        used: set[int] = set()
        if len(self.assigned) != inst.num_bidders:
            raise InvariantError("allocation length differs from bidder count")
        for i, a in enumerate(self.assigned):
            if a is None:
                continue
            bundle = inst.bids[i][a].bundle
            if used & bundle:
                raise InvariantError(f"bidder {i}'s bundle overlaps another winner's")
            used |= bundle

    def winning_value(self, inst: Instance, bidder: int) -> Fraction:
        a = self.assigned[bidder]
        return ZERO if a is None else inst.bids[bidder][a].value

    def welfare(self, inst: Instance) -> Fraction:
        return sum((self.winning_value(inst, i) for i in range(inst.num_bidders)), ZERO)


@dataclass(frozen=True)
class UtilityVector:
    pi: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(to_fraction(x) for x in self.pi))

    @classmethod
    def zeros(cls, n: int) -> "UtilityVector":
        return cls((ZERO,) * n)

    @classmethod
    def from_mapping(cls, n: int, values: Mapping[int, Fraction]) -> "UtilityVector":
        return cls(tuple(values.get(i, ZERO) for i in range(n)))

    def __len__(self):
        return len(self.pi)

    def __getitem__(self, i):
        return self.pi[i]

    @property
    def total(self) -> Fraction:
        return sum(self.pi, ZERO)

    def check(self, inst: Instance, alloc: Allocation) -> None:
        if len(self.pi) != inst.num_bidders:
            raise InvariantError("utility vector length differs from bidder count")
        for i, p in enumerate(self.pi):
            if p < 0:
                raise InvariantError(f"bidder {i} has negative utility {p}")
            cap = alloc.winning_value(inst, i)
            if p > cap:
                raise InvariantError(f"bidder {i} utility {p} exceeds winning bid {cap}")


@dataclass(frozen=True)
class OracleStats:
    queries: int = 0
    per_call: tuple[int, ...] = ()


@dataclass(frozen=True)
class PaymentOutcome:
    rule: str
    utilities: UtilityVector
    payments: tuple[Fraction, ...]
    allocation: Allocation
    oracle_stats: OracleStats = field(default_factory=OracleStats)

    @property
    def revenue(self) -> Fraction:
        return sum(self.payments, ZERO)


def leximin_compare(x: Sequence, y: Sequence) -> int:
    """Return 1 if ``x`` leximin-dominates ``y``, -1 if ``y`` dominates, 0 if equal.

    Both vectors must cover the same bidder set. Mappings are compared on
    their keys; plain sequences must have equal length.

    >>> leximin_compare((1, 1, 1), (2, 0, 2))
    1
    """
    if isinstance(x, Mapping) or isinstance(y, Mapping):
        if not (isinstance(x, Mapping) and isinstance(y, Mapping)) or set(x) != set(y):
            raise ValueError("vectors cover different bidder sets")
        x, y = list(x.values()), list(y.values())
    if isinstance(x, UtilityVector):
        x = x.pi
    if isinstance(y, UtilityVector):
        y = y.pi
    if len(x) != len(y):
        raise ValueError("vectors cover different bidder sets")
    for a, b in zip(sorted(x), sorted(y)):
        if a != b:
            return 1 if a > b else -1
    return 0


def utilities_to_payments(inst: Instance, alloc: Allocation, pi: UtilityVector) -> tuple[Fraction, ...]:
    """p_i = v_i(a_i) - pi_i for winners, 0 for everyone else."""
    out = []
    for i in range(inst.num_bidders):
        v = alloc.winning_value(inst, i)
        if alloc.assigned[i] is None:
            if pi[i] != 0:
                raise InvariantError(f"non-winner {i} has nonzero utility {pi[i]}")
            out.append(ZERO)
            continue
        if pi[i] > v or pi[i] < 0:
            raise InvariantError(f"utility {pi[i]} of bidder {i} outside [0, {v}]")
        out.append(v - pi[i])
    return tuple(out)


def make_outcome(rule: str, inst: Instance, alloc: Allocation, pi: UtilityVector,
                 stats: OracleStats | None = None) -> PaymentOutcome:
    return PaymentOutcome(rule, pi, utilities_to_payments(inst, alloc, pi), alloc,
                          stats or OracleStats())
