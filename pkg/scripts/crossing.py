#!/usr/bin/env python3
"""Locate where the heuristic count of 2n-point sets drops below one."""

from n3il.analytics import LAMBDA_C, crossing_n, heuristic_count_log, leading_coefficient

n = crossing_n()
for k in (n - 2, n - 1, n, n + 1):
    print(f"n={k}: log C(n, 2n) = {heuristic_count_log(k, 2 * k):+.6f}")
print(f"first n with C(n, 2n) < 1: {n}")
print(f"lambda_c = pi/sqrt(3) = {LAMBDA_C:.6f}; leading coefficient at 1.80: {leading_coefficient(1.8):+.5f}, "
      f"at 1.82: {leading_coefficient(1.82):+.5f}")
