import json
from decimal import Decimal
from fractions import Fraction as F

import pytest

from blo_auction import bench, generate_chain, price, solve_instance
from blo_auction.bench import compute_metrics, deviate, run_compare, verify_bounds
from blo_auction.model import Bid

from conftest import example1, small_random


def test_metrics_example1(ex1, ex1_wd):
    m = compute_metrics(ex1, ex1_wd, price(ex1, ex1_wd, "mrc"))
    assert (m.revenue, m.total_utility, m.min_utility, m.zero_ratio) == (2, 4, 0, F(1, 3))
    assert m.std == Decimal("0.9428") and m.gini == Decimal("0.3333")
    b = compute_metrics(ex1, ex1_wd, price(ex1, ex1_wd, "blo"))
    assert (b.revenue, b.total_utility, b.min_utility, b.zero_ratio) == (3, 3, 1, 0)
    assert b.std == Decimal("0.0000") and b.gini == Decimal("0.0000")
    assert b.as_dict()["zero_ratio"] == "0.0000"


def test_compare_example1():
    report = run_compare([("ex1", example1())], ["vcg", "mrc", "blo"])
    assert report["schema_version"] == bench.SCHEMA_VERSION
    row = report["instances"][0]["rules"]
    assert row["blo"]["utilities"] == ["1", "1", "1", "0", "0"]
    assert row["mrc"]["payments"] == ["0", "2", "0", "0", "0"]
    assert report["summary"]["vcg"]["revenue"] == "0"
    text = bench.render_compare(report)
    assert text.splitlines()[0].startswith("rule") and "blo" in text


def test_compare_empty_and_unknown():
    report = run_compare([("ex1", example1())], [])
    assert report["instances"] == [] and report["summary"] == {}
    assert run_compare([], ["blo"])["summary"]["blo"] == {"instances": 0}
    with pytest.raises(ValueError):
        run_compare([], ["bogus"])


def test_compare_json_deterministic():
    insts = [(str(s), small_random(s)) for s in range(20)]
    a = json.dumps(run_compare(insts, list(bench.rules.RULES)), sort_keys=True)
    b = json.dumps(run_compare(insts, list(bench.rules.RULES)), sort_keys=True)
    assert a == b


def test_verify():
    report = verify_bounds([("ex1", example1()), ("c5", generate_chain(5))] +
                           [(str(s), small_random(s)) for s in range(30)])
    assert report["ok"] and report["violations"] == 0
    c5 = report["instances"][1]["checks"]["zero_winners"]
    assert c5["chain_k"] == 5 and c5["mrc_zero"] >= 2 and c5["blo_zero"] == 0


def test_utility_ratio_bound_values():
    assert bench.utility_ratio_bound(3) == F(3, 4)
    assert bench.utility_ratio_bound(2) == 1
    assert bench.query_bound(3) == 7


def test_deviate_example1():
    # middle winner shades to 1 under MRC: its true utility goes from 0 to 1
    r = deviate(example1(), 1, [Bid(frozenset({1}), F(1))], "mrc")
    assert (r["before"], r["after"], r["delta"]) == ("0", "1", "1")
    with pytest.raises(ValueError):
        deviate(example1(), 9, [], "mrc")


def test_instance_json_round_trip():
    for s in range(10):
        inst = small_random(s)
        text = json.dumps(bench.instance_to_json(inst), sort_keys=True)
        assert bench.instance_from_json(text) == inst
    with pytest.raises(ValueError):
        bench.instance_from_json({"schema_version": 99})


def test_time_waterfill_reports_queries():
    t, q = bench.time_waterfill([example1()], reuse=True, repeats=1)
    assert t >= 0 and q == 5
