"""Command-line entry point: ``n3il <subcommand> ...`` or ``python3 -m n3il``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import analytics, portfolio, verify as vfy
from .model import build_model, export_model, model_size_report
from .search import SAT, UNSAT, SearchConfig, solve

EXIT_OK, EXIT_ERROR, EXIT_NO_SOLUTION = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def _positive_int(text: str) -> int:
    k = int(text)
    if k < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return k


def _grid_n(text: str) -> int:
    k = int(text)
    if k < 2:
        raise argparse.ArgumentTypeError(f"grid size must be >= 2, got {text}")
    return k


def _positive_float(text: str) -> float:
    x = float(text)
    if not x > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return x


def _seed(text: str) -> int:
    k = int(text)
    if not 0 <= k < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return k


def _probability(text: str) -> float:
    p = float(text)
    if not 0 < p < 1:
        raise argparse.ArgumentTypeError(f"expected a probability in (0, 1), got {text}")
    return p


def _print_points(points) -> None:
    print(" ".join(f"({i},{j})" for i, j in sorted(points)))


def _write_solution(m, assignment, out: str | None) -> vfy.Configuration:
    config = vfy.Configuration.of(m.n, m.occupied(assignment))
    reps = vfy.restrict(config) if m.kind == "reduced" else None
    path = out or f"solution-n{m.n}.json"
    Path(path).write_text(vfy.config_to_json(config, reps))
    return config


# -- subcommands -----------------------------------------------------------------

def cmd_gen(a) -> int:
    m = build_model(a.n, a.reduced)
    data = export_model(m, a.format)
    Path(a.out).write_bytes(data)
    print(f"{m.kind} n={m.n}: {m.num_vars} variables, {m.num_constraints} constraints -> {a.out}")
    return EXIT_OK


def cmd_solve(a) -> int:
    m = build_model(a.n, a.reduced)
    res = solve(m, SearchConfig(seed=a.seed, timeout=a.timeout))
    print(f"status={res.status} elapsed={res.elapsed:.4f}s nodes={res.nodes} restarts={res.restarts}")
    if res.status != SAT:
        return EXIT_NO_SOLUTION if res.status != UNSAT else EXIT_ERROR
    config = _write_solution(m, res.assignment, a.out)
    _print_points(config.points)
    return EXIT_OK


def cmd_race(a) -> int:
    m = build_model(a.n, a.reduced)
    rec = portfolio.race(m, a.M, a.seed_base, a.timeout)
    text = rec.to_json()
    if a.record:
        Path(a.record).write_text(text)
    counts: dict[str, int] = {}
    for r in rec.per_instance:
        counts[r.status] = counts.get(r.status, 0) + 1
    summary = " ".join(f"{k}={v}" for k, v in sorted(counts.items()))
    if rec.winner_seed is None:
        print(f"no winner among {a.M} instances ({summary})")
        return EXIT_NO_SOLUTION
    print(f"winner seed={rec.winner_seed} wall_time_to_first={rec.wall_time_to_first:.4f}s ({summary})")
    config = _write_solution(m, rec.assignment, a.out)
    _print_points(config.points)
    return EXIT_OK


def cmd_cdf(a) -> int:
    m = build_model(a.n, a.reduced)
    runs = portfolio.collect_runs(m, a.runs, a.cutoff, a.seed_base, a.workers)
    portfolio.write_runs_csv(runs, a.out)
    F = portfolio.EmpiricalCdf.from_runs(runs, a.cutoff)
    print(f"{len(F.times)} of {F.total_runs} runs finished within {a.cutoff}s ({F.censored} censored) -> {a.out}")
    return EXIT_OK


def cmd_fit(a) -> int:
    F = portfolio.EmpiricalCdf.from_runs(portfolio.read_runs_csv(a.input))
    if F.censored:
        print(f"note: {F.censored} censored runs ignored", file=sys.stderr)
    fit = analytics.fit_from_cdf(F, a.M, a.window_p)
    mean, t50 = analytics.fit_statistics(fit, 0.5)
    _, t98 = analytics.fit_statistics(fit, 0.98)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("t0", "t1", "mean", "t_0.5", "t_0.98"))
    w.writerow(tuple(f"{x:.6g}" for x in (fit.t0, fit.t1, mean, t50, t98)))
    return EXIT_OK


def _load_config(a) -> vfy.Configuration:
    if a.fixture is not None:
        fx = vfy.load_fixtures()
        if a.fixture not in fx:
            raise CliError(f"no bundled fixture for n={a.fixture}; available: {sorted(fx)}")
        return vfy.expand(fx[a.fixture])
    config, reps = vfy.read_config(a.input)
    return config if config is not None else vfy.expand(reps)


def cmd_verify(a) -> int:
    c = _load_config(a)
    verdict = vfy.verify(
        c,
        2 * c.n if a.expect_2n else None,
        two_per_line=a.two_per_line,
        method="brute" if a.brute else "slopes",
    )
    if verdict.ok:
        print(f"pass: n={c.n}, {len(c)} points")
        return EXIT_OK
    print(f"fail: n={c.n}, {len(c)} points: {verdict.reason} {verdict.witness or ''}".rstrip())
    return EXIT_ERROR


def cmd_expand(a) -> int:
    if a.fixture is not None:
        reps = vfy.load_fixtures().get(a.fixture)
        if reps is None:
            raise CliError(f"no bundled fixture for n={a.fixture}")
    else:
        _, reps = vfy.read_config(a.input)
        if reps is None:
            raise CliError(f"{a.input}: no representatives to expand")
    c = vfy.expand(reps)
    Path(a.out).write_text(vfy.config_to_json(c, reps))
    print(f"n={c.n}: {len(reps.reps)} representatives -> {len(c)} points -> {a.out}")
    return EXIT_OK


def cmd_stats(a) -> int:
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("n", "k", "t_n", "q_n", "logC"))
    for n in a.n:
        p = analytics.HeuristicParams.compute(n, a.k)
        w.writerow((n, p.k, p.t_n, f"{float(p.q_n):.12e}", f"{p.logC:.9f}"))
    return EXIT_OK


def cmd_oracle(a) -> int:
    t_formula = analytics.triple_count_formula(a.n)
    t_brute = vfy.count_collinear_triples(a.n)
    print(f"t_n formula={t_formula} brute_force={t_brute}")
    ok = t_formula == t_brute
    if a.n <= vfy.D_GUARD:
        d, witness = vfy.brute_force_D(a.n)
        print(f"D({a.n})={d}")
        _print_points(witness.points)
        ok &= bool(vfy.verify(witness, d))
    return EXIT_OK if ok else EXIT_ERROR


def cmd_sizes(a) -> int:
    if a.to < a.frm:
        raise CliError("--to must be >= --from")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(("n", "direct_vars", "reduced_vars", "direct_constraints", "reduced_constraints"))
    for r in model_size_report(a.frm, a.to):
        w.writerow((r.n, r.direct_vars, r.reduced_vars, r.direct_constraints, r.reduced_constraints))
        sys.stdout.flush()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="n3il", description="No-three-in-line models, solver, racing and analysis.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def model_flags(s):
        s.add_argument("--n", type=_grid_n, required=True)
        s.add_argument("--reduced", action="store_true", help="use the rotation-reduced model")

    s = sub.add_parser("gen", help="export a model")
    model_flags(s)
    s.add_argument("--format", choices=("opb", "text"), default="opb")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="single seeded solve")
    model_flags(s)
    s.add_argument("--seed", type=_seed, default=0)
    s.add_argument("--timeout", type=_positive_float, default=60.0)
    s.add_argument("--out", help="solution file (default solution-n<N>.json)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("race", help="race M seeded instances")
    model_flags(s)
    s.add_argument("-M", type=_positive_int, required=True)
    s.add_argument("--seed-base", type=_seed, default=0)
    s.add_argument("--timeout", type=_positive_float, default=60.0)
    s.add_argument("--out", help="solution file (default solution-n<N>.json)")
    s.add_argument("--record", help="write the race record as JSON")
    s.set_defaults(func=cmd_race)

    s = sub.add_parser("cdf", help="collect single-run solve times")
    model_flags(s)
    s.add_argument("--runs", type=_positive_int, required=True)
    s.add_argument("--cutoff", type=_positive_float, required=True)
    s.add_argument("--seed-base", type=_seed, default=0)
    s.add_argument("--workers", type=_positive_int, default=None, help=f"default: ${portfolio.WORKERS_ENV} or CPU count")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cdf)

    s = sub.add_parser("fit", help="shifted-exponential fit of a run CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("-M", type=_positive_int, required=True)
    s.add_argument("--window-p", type=_probability, default=0.98)
    s.set_defaults(func=cmd_fit)

    for name, func, helptext in (("verify", cmd_verify, "check a configuration"), ("expand", cmd_expand, "expand representatives")):
        s = sub.add_parser(name, help=helptext)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--in", dest="input")
        src.add_argument("--fixture", type=int, help="use a bundled representative set")
        s.set_defaults(func=func)
        if name == "verify":
            s.add_argument("--expect-2n", action="store_true")
            s.add_argument("--two-per-line", action="store_true", help="also require 2 points per row and column")
            s.add_argument("--brute", action="store_true", help="O(k^3) triple check")
        else:
            s.add_argument("--out", required=True)

    s = sub.add_parser("stats", help="t_n, q_n and log C(n, k)")
    s.add_argument("--n", type=_grid_n, nargs="+", required=True)
    s.add_argument("--k", type=int, default=None, help="set size (default 2n)")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("oracle", help="brute-force D(n) and triple counts")
    s.add_argument("--n", type=_grid_n, required=True)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("sizes", help="model size table")
    s.add_argument("--from", dest="frm", type=_grid_n, required=True)
    s.add_argument("--to", type=_grid_n, required=True)
    s.set_defaults(func=cmd_sizes)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        a = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        return a.func(a)
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except (CliError, ValueError, OSError, json.JSONDecodeError, KeyError, TypeError, RuntimeError) as e:
        print(f"n3il: error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
