#!/usr/bin/env python3
"""Pilot-then-batch runtime distribution for one grid size.

A short pilot picks a cutoff (a multiple of the slowest pilot completion);
the main batch then runs with that single cutoff, writes the run CSV, and
fits the shifted-exponential model to the M-fold minimum distribution.
"""

import argparse

from n3il.analytics import FitError, fit_from_cdf, fit_statistics
from n3il.model import build_model
from n3il.portfolio import EmpiricalCdf, collect_runs, write_runs_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--direct", action="store_true")
    ap.add_argument("--pilot", type=int, default=20)
    ap.add_argument("--runs", type=int, default=300)
    ap.add_argument("--cutoff-factor", type=float, default=5.0)
    ap.add_argument("-M", type=int, default=8)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="runs.csv")
    args = ap.parse_args()

    m = build_model(args.n, reduced=not args.direct)
    pilot = collect_runs(m, args.pilot, cutoff=600.0, seed_base=10**9, workers=args.workers)
    slowest = max(r.elapsed_seconds for r in pilot)
    cutoff = args.cutoff_factor * slowest
    print(f"pilot: {args.pilot} runs, slowest {slowest:.4f}s -> cutoff {cutoff:.4f}s")

    runs = collect_runs(m, args.runs, cutoff, seed_base=0, workers=args.workers)
    write_runs_csv(runs, args.out)
    F = EmpiricalCdf.from_runs(runs, cutoff)
    print(f"batch: {len(F.times)}/{F.total_runs} completed ({F.censored} censored) -> {args.out}")
    try:
        fit = fit_from_cdf(F, args.M)
    except FitError as e:
        print(f"fit failed: {e}")
        return
    mean, t50 = fit_statistics(fit, 0.5)
    _, t98 = fit_statistics(fit, 0.98)
    print(f"M={args.M}: t0={fit.t0:.5f}s t1={fit.t1:.5f}s mean={mean:.5f}s median={t50:.5f}s t98={t98:.5f}s "
          f"({fit.points} points)")


if __name__ == "__main__":
    main()
