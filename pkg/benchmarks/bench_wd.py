"""Compiled vs pure-Python winner-determination kernel.

    python3 benchmarks/bench_wd.py [--instances 30] [--goods 16] [--bidders 14] [--bids 3]

Both kernels see the same integer-scaled packing problems; results are
checked for equality before timings are reported.
"""
import argparse
import statistics
import time

from blo_auction import GeneratorConfig, generate
from blo_auction import _packing_py
from blo_auction import winner_determination as wdm


def problems(n, goods, bidders, bids):
    out = []
    for seed in range(n):
        inst = generate(GeneratorConfig("decay-bundles", goods, bidders, bids, seed))
        flat = wdm._flatten(inst.bids, False)
        out.append((wdm._masks(flat, inst.num_goods), [int(b.value) for _, _, b in flat]))
    return out


def clock(fn, probs, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        res = [fn(m, w) for m, w in probs]
        best = min(best, time.perf_counter() - t0)
    return best, res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--instances", type=int, default=30)
    ap.add_argument("--goods", type=int, default=16)
    ap.add_argument("--bidders", type=int, default=14)
    ap.add_argument("--bids", type=int, default=3)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    probs = problems(args.instances, args.goods, args.bidders, args.bids)
    t_py, r_py = clock(_packing_py.pack, probs, args.repeats)
    print(f"kernel selected at import: {wdm.KERNEL}")
    print(f"python   {t_py:8.4f}s  ({args.instances} problems, best of {args.repeats})")
    if wdm._compiled is None:
        print("compiled kernel not available; build with `pip install --no-build-isolation -e .`")
        return
    t_c, r_c = clock(wdm._compiled.pack, probs, args.repeats)
    assert r_c == r_py, "kernels disagree"
    print(f"compiled {t_c:8.4f}s  speedup x{t_py / t_c:.1f}")
    sizes = [len(m) for m, _ in probs]
    print(f"bids per problem: median {statistics.median(sizes)}, max {max(sizes)}")


if __name__ == "__main__":
    main()
