"""Exact core-selecting payment rules for combinatorial auctions.

The headline rule is the bidder-leximin-optimal (BLO) core outcome, computed
by water-filling with constraint generation search and constraint reuse
(:func:`blo_wf_cgs_cr`). Everything is exact rational arithmetic.
"""
from .cats_io import GeneratorConfig, generate, generate_chain, parse_cats, write_cats
from .core import brute_force_blo, brute_force_mrc, enumerate_core, is_in_core, max_core_utility
from .model import Allocation, Bid, Instance, PaymentOutcome, UtilityVector, leximin_compare, utilities_to_payments
from .rules import blo_wf_cgs_cr, cgs_search, fast_core, mrc_ccg, mrc_quadratic, pay_as_bid, price, vcg
from .winner_determination import KERNEL, OracleHandle, WdResult, coalition_welfare, solve_instance, solve_wd, \
    solve_wd_bruteforce, truncate_bids

__version__ = "0.1.0"
