"""CATS instance files and built-in desk-scale generators.

CATS format::

    % comment
    goods 3
    bids 5
    dummy 0
    0 2 0 #
    1 2.5 1 3 #

Each bid line is ``<bid-id> <value> <good>... #``. Goods ``>= goods`` are
dummy goods; bids sharing a dummy good form one XOR bidder, all other bids
are single-bid bidders. Values are parsed exactly (``12.75`` is ``51/4``);
as an extension ``p/q`` values are accepted and written when a value has no
finite decimal expansion.

Generators draw from numpy's PCG64 bit generator through raw 64-bit words
only (never through ``numpy.random.Generator`` methods), so a seed produces
the same instance on every platform and numpy version.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import numpy as np

from .model import Bid, Instance, format_fraction

DISTRIBUTIONS = ("uniform-bundles", "decay-bundles", "chain-adversarial")
MAX_UNIFORM_BUNDLE = 4
DECAY_CONTINUE = Fraction(55, 100)


class CatsParseError(ValueError):
    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


def _parse_value(tok: str, lineno: int) -> Fraction:
    try:
        v = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise CatsParseError(lineno, f"bad bid value {tok!r}") from None
    if v < 0:
        raise CatsParseError(lineno, f"negative bid value {tok!r}")
    return v


def parse_cats(data: bytes | str | Iterable[str]) -> Instance:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    lines = data.splitlines() if isinstance(data, str) else list(data)
    header: dict[str, int] = {}
    raw_bids: list[tuple[int, int, Fraction, list[int]]] = []  # (lineno, id, value, goods)
    seen_ids: set[int] = set()
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("%"):
            continue
        toks = line.split()
        key = toks[0].lower()
        if key in ("goods", "bids", "dummy"):
            if raw_bids:
                raise CatsParseError(lineno, f"header {key!r} after the first bid")
            if len(toks) != 2 or not toks[1].isdigit():
                raise CatsParseError(lineno, f"malformed header line {line!r}")
            if key in header:
                raise CatsParseError(lineno, f"duplicate header {key!r}")
            header[key] = int(toks[1])
            continue
        if "goods" not in header or "bids" not in header:
            raise CatsParseError(lineno, "bid line before 'goods' and 'bids' headers")
        if toks[-1] != "#":
            raise CatsParseError(lineno, "bid line must end with '#'")
        if len(toks) < 4:
            raise CatsParseError(lineno, "bid line needs an id, a value and at least one good")
        try:
            bid_id = int(toks[0])
            goods = [int(t) for t in toks[2:-1]]
        except ValueError:
            raise CatsParseError(lineno, f"malformed bid line {line!r}") from None
        if bid_id in seen_ids:
            raise CatsParseError(lineno, f"duplicate bid id {bid_id}")
        seen_ids.add(bid_id)
        total = header["goods"] + header.get("dummy", 0)
        for g in goods:
            if not 0 <= g < total:
                raise CatsParseError(lineno, f"good index {g} outside [0, {total})")
        raw_bids.append((lineno, bid_id, _parse_value(toks[1], lineno), goods))

    if "goods" not in header or "bids" not in header:
        raise CatsParseError(len(lines), "missing 'goods' or 'bids' header")
    if len(raw_bids) != header["bids"]:
        raise CatsParseError(len(lines), f"header announces {header['bids']} bids, found {len(raw_bids)}")
    n_goods, n_dummy = header["goods"], header.get("dummy", 0)

    groups: list[list[Bid]] = []
    owner: dict[int, int] = {}
    for lineno, _, value, goods in raw_bids:
        dummies = {g for g in goods if g >= n_goods}
        groups_hit = {owner[g] for g in dummies if g in owner}
        if len(groups_hit) > 1:
            raise CatsParseError(lineno, "dummy goods of this bid belong to different bidders")
        if groups_hit:
            gi = groups_hit.pop()
        else:
            gi = len(groups)
            groups.append([])
        for g in dummies:
            owner[g] = gi
        groups[gi].append(Bid(frozenset(goods), value))
    return Instance(n_goods, n_dummy, tuple(tuple(g) for g in groups))


def _format_value(v: Fraction) -> str:
    d = v.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return format_fraction(v)
    places = max(twos, fives)
    if places == 0:
        return str(v.numerator)
    scaled = v.numerator * 10 ** places // v.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}"


def write_cats(inst: Instance) -> bytes:
    """Serialise ``inst``; bidders with several bids must share a dummy good."""
    out = [f"goods {inst.num_goods}", f"bids {inst.num_bids}", f"dummy {inst.num_dummy}"]
    bid_id = 0
    for i, lst in enumerate(inst.bids):
        if not lst:
            raise ValueError(f"bidder {i} has no bids and cannot be written in CATS format")
        if len(lst) > 1:
            common = frozenset.intersection(*(b.bundle for b in lst))
            if not any(g >= inst.num_goods for g in common):
                raise ValueError(f"bidder {i}'s bids share no dummy good")
        for b in lst:
            goods = " ".join(str(g) for g in sorted(b.bundle))
            out.append(f"{bid_id} {_format_value(b.value)} {goods} #")
            bid_id += 1
    return ("\n".join(out) + "\n").encode("ascii")


# ------------------------------------------------------------------ generators

class Pcg64Stream:
    """Portable draws built on PCG64's raw output."""

    def __init__(self, seed: int):
        self._bits = np.random.PCG64(seed)

    def _raw(self) -> int:
        return int(self._bits.random_raw())

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection (unbiased)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - (1 << 64) % n
        while True:
            r = self._raw()
            if r < limit:
                return r % n

    def between(self, lo: int, hi: int) -> int:
        return lo + self.below(hi - lo + 1)

    def chance(self, p: Fraction) -> bool:
        """True with probability ``p`` (exact: compares 64 random bits)."""
        return self._raw() * p.denominator < p.numerator * (1 << 64)

    def sample(self, n: int, k: int) -> list[int]:
        pool = list(range(n))
        for j in range(k):
            s = j + self.below(n - j)
            pool[j], pool[s] = pool[s], pool[j]
        return sorted(pool[:k])


@dataclass(frozen=True)
class GeneratorConfig:
    distribution: str
    num_goods: int
    num_bidders: int
    bids_per_bidder: int
    seed: int = 0

    def __post_init__(self):
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if min(self.num_goods, self.num_bidders, self.bids_per_bidder) < 1:
            raise ValueError("goods, bidders and bids per bidder must all be at least 1")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must be an unsigned 64-bit integer")


def _with_xor(num_goods: int, bundles_per_bidder: list[list[tuple[list[int], int]]]) -> Instance:
    bids, dummy = [], 0
    for lst in bundles_per_bidder:
        extra = []
        if len(lst) > 1:
            extra = [num_goods + dummy]
            dummy += 1
        bids.append(tuple(Bid(frozenset(goods + extra), Fraction(v)) for goods, v in lst))
    return Instance(num_goods, dummy, tuple(bids))


def _uniform(cfg: GeneratorConfig, rng: Pcg64Stream) -> Instance:
    top = min(MAX_UNIFORM_BUNDLE, cfg.num_goods)
    per_bidder = []
    for _ in range(cfg.num_bidders):
        lst = []
        for _ in range(cfg.bids_per_bidder):
            size = rng.between(1, top)
            lst.append((rng.sample(cfg.num_goods, size), rng.between(1, 100)))
        per_bidder.append(lst)
    return _with_xor(cfg.num_goods, per_bidder)


def _decay(cfg: GeneratorConfig, rng: Pcg64Stream) -> Instance:
    per_bidder = []
    for _ in range(cfg.num_bidders):
        lst = []
        for _ in range(cfg.bids_per_bidder):
            bundle = {rng.below(cfg.num_goods)}
            while len(bundle) < cfg.num_goods and rng.chance(DECAY_CONTINUE):
                rest = [g for g in range(cfg.num_goods) if g not in bundle]
                bundle.add(rest[rng.below(len(rest))])
            value = 20 * len(bundle) + rng.between(-5, 5)
            lst.append((sorted(bundle), value))
        per_bidder.append(lst)
    return _with_xor(cfg.num_goods, per_bidder)


def generate(config: GeneratorConfig) -> Instance:
    """Pure function of ``config``.

    ``uniform-bundles``: bundle size uniform in 1..min(4, goods), values
    uniform integers in [1, 100]. ``decay-bundles``: start from one random
    good and keep adding one with probability 0.55; value 20 per good plus
    uniform integer noise in [-5, 5]. ``chain-adversarial`` ignores bidders,
    bids and seed and returns ``generate_chain(num_goods)``.
    """
    if config.distribution == "chain-adversarial":
        return generate_chain(config.num_goods)
    rng = Pcg64Stream(config.seed)
    if config.distribution == "uniform-bundles":
        return _uniform(config, rng)
    return _decay(config, rng)


def generate_chain(k: int) -> Instance:
    """k singleton bidders worth 2 on good j, then k-1 bridges worth 2 on {j, j+1}.

    ``generate_chain(3)`` is the five-bidder, three-good example whose MRC
    outcome leaves the middle winner with nothing.
    """
    if k < 3 or k % 2 == 0:
        raise ValueError("chain length must be odd and at least 3")
    two = Fraction(2)
    singles = [(Bid(frozenset({j}), two),) for j in range(k)]
    bridges = [(Bid(frozenset({j, j + 1}), two),) for j in range(k - 1)]
    return Instance(k, 0, tuple(singles + bridges))
