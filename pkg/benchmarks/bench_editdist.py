"""Benchmark: compiled edit-distance kernel vs the pure-Python fallback.

ANLS scoring runs one Levenshtein per (prediction, ground truth) pair, so
on document benchmarks this is the harness's hot loop. Run:

    python benchmarks/bench_editdist.py [--pairs 20000] [--max-len 24]
"""

import argparse
import random
import time

from damqa.metrics._editdist_py import levenshtein as lev_python

try:
    from damqa.metrics._editdist import levenshtein as lev_c
except ImportError:
    lev_c = None

ALPHABET = "abcdefghijklmnopqrstuvwxyz 0123456789%$.,"


def make_pairs(n, max_len, seed=1234):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = "".join(rng.choice(ALPHABET) for _ in range(rng.randrange(1, max_len)))
        # answers in practice are near-misses of each other, not random noise
        b = list(a)
        for _ in range(rng.randrange(0, max(2, max_len // 4))):
            pos = rng.randrange(len(b))
            b[pos] = rng.choice(ALPHABET)
        pairs.append((a, "".join(b)))
    return pairs


def bench(fn, pairs):
    started = time.perf_counter()
    total = 0
    for a, b in pairs:
        total += fn(a, b)
    elapsed = time.perf_counter() - started
    return elapsed, total


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=20000)
    parser.add_argument("--max-len", type=int, default=24)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.max_len)

    py_time, py_total = bench(lev_python, pairs)
    print(f"pure python : {args.pairs} pairs in {py_time:.3f}s "
          f"({args.pairs / py_time:,.0f} pairs/s)")

    if lev_c is None:
        print("compiled    : extension not built (pip install -e . with a C toolchain)")
        return

    c_time, c_total = bench(lev_c, pairs)
    assert c_total == py_total, "backends disagree"
    print(f"compiled    : {args.pairs} pairs in {c_time:.3f}s "
          f"({args.pairs / c_time:,.0f} pairs/s)")
    print(f"speedup     : {py_time / c_time:.1f}x")


if __name__ == "__main__":
    main()
