#!/usr/bin/env python3
"""Sweep the synthetic ternary-vector benchmark over element counts.

Timings are machine-local and only useful relative to each other; node
counts are deterministic per seed.
"""

import argparse

from pecount.selftest import emptiness_speedup, run_bench


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--width", type=int, default=128)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--counts", type=int, nargs="+",
                        default=[500, 1000, 2000, 3000])
    parser.add_argument("--speedup", action="store_true",
                        help="also compare counting vs enumeration at width 16")
    args = parser.parse_args()

    print(f"{'count':>7} {'nodes':>8} {'build(s)':>9} {'empty(s)':>9} "
          f"{'empty_pecs':>10}")
    for count in args.counts:
        result = run_bench(count=count, width=args.width, seed=args.seed, runs=1)
        print(f"{result.count:>7} {result.nodes:>8} "
              f"{result.build_seconds:>9.3f} {result.emptiness_seconds:>9.3f} "
              f"{result.empty_pecs:>10}")
    if args.speedup:
        s = emptiness_speedup(width=16, groups=12, seed=args.seed)
        print(f"\nwidth-16 tiling instance: counting {s.counting_seconds*1e3:.2f} ms, "
              f"enumeration {s.enumeration_seconds*1e3:.1f} ms "
              f"({s.speedup:.0f}x, agree={s.agree})")


if __name__ == "__main__":
    main()
