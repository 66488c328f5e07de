"""``blo-auction`` command line.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error.
Set ``AUCTION_LOG=debug`` to trace every CGS probe on stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bench, rules
from .cats_io import DISTRIBUTIONS, CatsParseError, GeneratorConfig, generate, parse_cats, write_cats
from .model import Bid, InvariantError, format_fraction
from .winner_determination import solve_instance

_ALIASES = {"uniform": "uniform-bundles", "decay": "decay-bundles", "chain": "chain-adversarial"}


class UsageError(Exception):
    pass


def _setup_logging() -> None:
    level = os.environ.get("AUCTION_LOG", "").strip().lower()
    levels = {"1": logging.DEBUG, "trace": logging.DEBUG, "debug": logging.DEBUG,
              "info": logging.INFO, "warning": logging.WARNING}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def load_instance(path: str):
    data = Path(path).read_bytes()
    if path.endswith(".json"):
        return bench.instance_from_json(data.decode("utf-8"))
    return parse_cats(data)


def _emit(obj, as_json: bool, text: str | None = None) -> None:
    if as_json or text is None:
        print(json.dumps(obj, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_generate(args) -> int:
    dist = _ALIASES.get(args.dist, args.dist)
    inst = generate(GeneratorConfig(dist, args.goods, args.bidders, args.bids_per_bidder, args.seed))
    if args.output and args.output.endswith(".json"):
        payload = (json.dumps(bench.instance_to_json(inst), indent=2, sort_keys=True) + "\n").encode()
    else:
        payload = write_cats(inst)
    if args.output:
        Path(args.output).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return 0


def cmd_solve(args) -> int:
    inst = load_instance(args.file)
    wd = solve_instance(inst)
    obj = {"schema_version": bench.SCHEMA_VERSION, "welfare": format_fraction(wd.welfare),
           "winners": sorted(wd.winners),
           "allocation": [None if a is None else a for a in wd.allocation.assigned]}
    text = f"welfare {format_fraction(wd.welfare)}\nwinners {' '.join(map(str, sorted(wd.winners)))}"
    _emit(obj, args.json, text)
    return 0


def cmd_price(args) -> int:
    inst = load_instance(args.file)
    wd = solve_instance(inst)
    outcome = rules.price(inst, wd, args.rule, epsilon=args.epsilon)
    metrics = bench.compute_metrics(inst, wd, outcome)
    obj = {"schema_version": bench.SCHEMA_VERSION, **bench.outcome_dict(outcome), "metrics": metrics.as_dict()}
    lines = [f"rule {outcome.rule}  welfare {format_fraction(wd.welfare)}  queries {outcome.oracle_stats.queries}",
             "bidder  utility  payment"]
    for i in sorted(wd.winners):
        lines.append(f"{i:<6}  {format_fraction(outcome.utilities[i]):<7}  {format_fraction(outcome.payments[i])}")
    lines.append(f"revenue {format_fraction(metrics.revenue)}")
    _emit(obj, args.json, "\n".join(lines))
    return 0


def _rule_list(spec: str) -> list[str]:
    names = [r for r in spec.replace(",", " ").split() if r]
    for r in names:
        if r not in rules.RULES and r != "blo-noreuse":
            raise UsageError(f"unknown rule {r!r}; expected one of {', '.join(rules.RULES)}")
    return names


def cmd_compare(args) -> int:
    names = _rule_list(args.rules)
    instances = [(f, load_instance(f)) for f in args.files]
    report = bench.run_compare(instances, names, args.epsilon)
    _emit(report, args.json, bench.render_compare(report))
    return 0


def cmd_verify(args) -> int:
    instances = [(f, load_instance(f)) for f in args.files]
    report = bench.verify_bounds(instances)
    lines = []
    for row in report["instances"]:
        failed = [k for k, c in row["checks"].items() if not c["ok"]]
        lines.append(f"{'PASS' if row['ok'] else 'FAIL'}  {row['name']}" + (f"  ({', '.join(failed)})" if failed else ""))
    lines.append(f"{report['violations']} violation(s)")
    _emit(report, args.json, "\n".join(lines))
    return 0 if report["ok"] else 1


def _parse_bid(text: str, num_goods: int) -> Bid:
    toks = text.split()
    if len(toks) < 2:
        raise UsageError(f"--bid needs a value and at least one good: {text!r}")
    try:
        value = Fraction(toks[0])
        goods = frozenset(int(t) for t in toks[1:])
    except ValueError:
        raise UsageError(f"malformed --bid {text!r}") from None
    if any(not 0 <= g < num_goods for g in goods):
        raise UsageError(f"--bid goods must be real goods in [0, {num_goods})")
    return Bid(goods, value)


def cmd_deviate(args) -> int:
    inst = load_instance(args.file)
    if not 0 <= args.bidder < inst.num_bidders:
        raise UsageError(f"no bidder {args.bidder}")
    bids = [_parse_bid(b, inst.num_goods) for b in args.bid]
    report = bench.deviate(inst, args.bidder, bids, args.rule, args.epsilon)
    text = f"bidder {args.bidder} under {args.rule}: {report['before']} -> {report['after']} (delta {report['delta']})"
    _emit(report, args.json, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blo-auction", description="Core-selecting payments for combinatorial auctions")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated instance")
    g.add_argument("--dist", required=True, choices=sorted(set(DISTRIBUTIONS) | set(_ALIASES)))
    g.add_argument("--goods", type=int, required=True)
    g.add_argument("--bidders", type=int, default=1)
    g.add_argument("--bids-per-bidder", type=int, default=1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="winner determination only")
    s.add_argument("file")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_solve)

    pr = sub.add_parser("price", help="clear an auction under one rule")
    pr.add_argument("file")
    pr.add_argument("--rule", required=True, choices=list(rules.RULES) + ["blo-noreuse"])
    pr.add_argument("--epsilon", type=Fraction, default=Fraction(1, 100))
    pr.add_argument("--json", action="store_true")
    pr.set_defaults(func=cmd_price)

    c = sub.add_parser("compare", help="compare rules over instances")
    c.add_argument("files", nargs="*")
    c.add_argument("--rules", default=",".join(rules.RULES))
    c.add_argument("--epsilon", type=Fraction, default=Fraction(1, 100))
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_compare)

    v = sub.add_parser("verify", help="check the BLO guarantees against brute-force oracles")
    v.add_argument("files", nargs="+")
    v.add_argument("--json", action="store_true")
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("deviate", help="re-clear with one bidder's bids replaced")
    d.add_argument("file")
    d.add_argument("--bidder", type=int, required=True)
    d.add_argument("--bid", action="append", required=True, help='"<value> <good> ..." (repeatable)')
    d.add_argument("--rule", required=True, choices=list(rules.RULES))
    d.add_argument("--epsilon", type=Fraction, default=Fraction(1, 100))
    d.add_argument("--json", action="store_true")
    d.set_defaults(func=cmd_deviate)
    return p


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CatsParseError, InvariantError, OSError, ValueError) as exc:
        print(f"blo-auction: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
