#!/usr/bin/env python3
"""Compare race(M) wall times with single runs over the same seed pool."""

import argparse
import os
import statistics

from n3il.model import build_model
from n3il.portfolio import race
from n3il.search import SearchConfig, solve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--direct", action="store_true")
    ap.add_argument("-M", type=int, default=8)
    ap.add_argument("--reps", type=int, default=30)
    args = ap.parse_args()

    m = build_model(args.n, reduced=not args.direct)
    races = [race(m, args.M, seed_base=args.M * k, timeout=600) for k in range(args.reps)]
    singles = [solve(m, SearchConfig(seed=s, timeout=600)).elapsed for s in range(args.M * args.reps)]
    walls = [r.wall_time_to_first for r in races if r.wall_time_to_first is not None]
    blocks = [min(singles[args.M * k: args.M * (k + 1)]) for k in range(args.reps)]
    print(f"cpus={os.cpu_count()} n={args.n} kind={m.kind} M={args.M} reps={args.reps}")
    print(f"median single run         {statistics.median(singles) * 1e3:9.2f} ms")
    print(f"median min of M singles   {statistics.median(blocks) * 1e3:9.2f} ms  (ideal race, one core per instance)")
    print(f"median race wall time     {statistics.median(walls) * 1e3:9.2f} ms")
    print(f"median launch overhead    {statistics.median(r.launch_overhead for r in races) * 1e3:9.2f} ms")
    print(f"max loser overrun         {max(r.max_loser_overrun() for r in races)} decisions")


if __name__ == "__main__":
    main()
