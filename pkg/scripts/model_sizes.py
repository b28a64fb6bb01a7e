#!/usr/bin/env python3
"""Print the model-size table and flag any row that differs from the reference values."""

import argparse
import time

from n3il.model import model_size_report

REFERENCE = {
    2: (4, 1, 2, 2),
    3: (9, 2, 8, 3),
    4: (16, 4, 14, 6),
    5: (25, 6, 32, 12),
    56: (3136, 784, 415230, 103868),
    57: (3249, 812, 446296, 118241),
    58: (3364, 841, 476358, 119160),
    59: (3481, 870, 510756, 135183),
    60: (3600, 900, 546354, 136660),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ns", type=int, nargs="+", default=sorted(REFERENCE))
    args = ap.parse_args()
    print(f"{'n':>3} {'direct vars':>11} {'reduced vars':>12} {'direct cons':>11} {'reduced cons':>12}  check")
    for n in args.ns:
        t = time.perf_counter()
        (r,) = model_size_report(n, n)
        row = (r.direct_vars, r.reduced_vars, r.direct_constraints, r.reduced_constraints)
        mark = "" if n not in REFERENCE else ("ok" if REFERENCE[n] == row else f"MISMATCH {REFERENCE[n]}")
        print(f"{n:>3} {row[0]:>11} {row[1]:>12} {row[2]:>11} {row[3]:>12}  {mark} ({time.perf_counter() - t:.1f}s)")


if __name__ == "__main__":
    main()
