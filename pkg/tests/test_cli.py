import json
import os
import subprocess
import sys

import pytest

from blo_auction.cli import main

from conftest import example1
from blo_auction import write_cats


@pytest.fixture
def ex1_file(tmp_path):
    p = tmp_path / "ex1.cats"
    p.write_bytes(write_cats(example1()))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.cats", tmp_path / "b.cats"
    for p in (a, b):
        assert run(capsys, "generate", "--dist", "decay", "--goods", "6", "--bidders", "4",
                   "--bids-per-bidder", "2", "--seed", "3", "-o", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    j = tmp_path / "a.json"
    assert run(capsys, "generate", "--dist", "chain", "--goods", "3", "-o", str(j))[0] == 0
    assert json.loads(j.read_text())["num_goods"] == 3
    code, out, _ = run(capsys, "generate", "--dist", "uniform", "--goods", "3", "--seed", "1")
    assert code == 0 and out.startswith("goods 3")


def test_solve_and_price(ex1_file, capsys):
    code, out, _ = run(capsys, "solve", ex1_file, "--json")
    assert code == 0 and json.loads(out)["welfare"] == "6"
    code, out, _ = run(capsys, "price", ex1_file, "--rule", "blo", "--json")
    obj = json.loads(out)
    assert code == 0 and obj["utilities"] == ["1", "1", "1", "0", "0"] and obj["metrics"]["revenue"] == "3"
    code, out, _ = run(capsys, "price", ex1_file, "--rule", "mrc")
    assert code == 0 and "revenue 2" in out


def test_compare_and_verify(ex1_file, capsys):
    code, out, _ = run(capsys, "compare", ex1_file, "--rules", "vcg,mrc blo", "--json")
    assert code == 0 and json.loads(out)["rules"] == ["vcg", "mrc", "blo"]
    code, out, _ = run(capsys, "compare", ex1_file)
    assert code == 0 and out.startswith("rule")
    code, out, _ = run(capsys, "verify", ex1_file)
    assert code == 0 and "0 violation(s)" in out


def test_deviate(ex1_file, capsys):
    code, out, _ = run(capsys, "deviate", ex1_file, "--bidder", "1", "--bid", "1 1", "--rule", "mrc", "--json")
    assert code == 0 and json.loads(out)["delta"] == "1"


@pytest.mark.parametrize("argv", [
    ["price", "missing.cats", "--rule", "blo"],
    ["compare", "--rules", "bogus"],
    ["deviate", "EX1", "--bidder", "1", "--bid", "x", "--rule", "mrc"],
    ["deviate", "EX1", "--bidder", "1", "--bid", "1 7", "--rule", "mrc"],
    ["deviate", "EX1", "--bidder", "9", "--bid", "1 0", "--rule", "mrc"],
    ["generate", "--dist", "uniform", "--goods", "0"],
])
def test_usage_errors_exit_2(argv, ex1_file, capsys):
    argv = [ex1_file if a == "EX1" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2 and "error" in err


def test_parse_error_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.cats"
    p.write_text("goods 2\nbids 1\n0 1 9 #\n")
    code, _, err = run(capsys, "solve", str(p))
    assert code == 2 and "line 3" in err


def test_verify_failure_exit_1(ex1_file, monkeypatch, capsys):
    from blo_auction import bench
    monkeypatch.setattr(bench, "utility_ratio_bound", lambda w: 10)
    code, out, _ = run(capsys, "verify", ex1_file)
    assert code == 1 and "FAIL" in out


def test_trace_logging_subprocess(ex1_file):
    env = dict(os.environ, AUCTION_LOG="debug")
    r = subprocess.run([sys.executable, "-m", "blo_auction.cli", "price", ex1_file, "--rule", "blo"],
                       capture_output=True, text=True, env=env)
    assert r.returncode == 0
    assert "cgs t=1" in r.stderr
