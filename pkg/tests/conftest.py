from fractions import Fraction

import pytest

from blo_auction import GeneratorConfig, Instance, generate, solve_instance
from blo_auction.model import Bid

F = Fraction


def example1() -> Instance:
    """Three single-good winners worth 2 and two bridge bidders worth 2 on {a,b} and {b,c}."""
    two = F(2)
    return Instance(3, 0, (
        (Bid(frozenset({0}), two),),
        (Bid(frozenset({1}), two),),
        (Bid(frozenset({2}), two),),
        (Bid(frozenset({0, 1}), two),),
        (Bid(frozenset({1, 2}), two),),
    ))


def small_random(seed: int) -> Instance:
    """Up to 6 goods, 6 bidders and 3 bids per bidder, cycling through shapes by seed."""
    goods = 1 + seed % 6
    bidders = 1 + (seed // 6) % 6
    per = 1 + (seed // 36) % 3
    return generate(GeneratorConfig("uniform-bundles", goods, bidders, per, seed))


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def ex1_wd(ex1):
    return solve_instance(ex1)


def sole_bidder(value=5) -> Instance:
    return Instance(1, 0, ((Bid(frozenset({0}), F(value)),),))


def utils(outcome_or_vec):
    pi = getattr(outcome_or_vec, "utilities", outcome_or_vec)
    return tuple(pi.pi)
