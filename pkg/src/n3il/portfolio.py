"""Racing seeded solver instances and collecting single-run time distributions.

Workers are forked processes.  They share only the immutable model (inherited
through fork), one stop event, and a common launch timestamp; results come
back over a single queue read by the orchestrating process.
"""

from __future__ import annotations

import bisect
import csv
import json
import multiprocessing as mp
import os
import queue
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .model import ConstraintModel, build_direct
from .search import CANCELLED, SAT, SearchConfig, search_tables, solve

WORKERS_ENV = "N3IL_WORKERS"
CSV_HEADER = ("run_index", "seed", "status", "elapsed_seconds")

_CTX = mp.get_context("fork")


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        k = int(env)
        if k < 1:
            raise ValueError(f"{WORKERS_ENV} must be >= 1")
        return k
    return os.cpu_count() or 1


@dataclass(frozen=True)
class InstanceResult:
    seed: int
    status: str
    elapsed: float
    nodes: int = 0
    nodes_at_last_poll: int = 0
    assignment: tuple[int, ...] | None = None

    @property
    def overrun(self) -> int:
        """Decisions taken after the last poll that saw no stop signal."""
        return self.nodes - self.nodes_at_last_poll


@dataclass(frozen=True)
class SolveRecord:
    n: int
    kind: str
    M: int
    seed_base: int
    winner_seed: int | None
    wall_time_to_first: float | None
    per_instance: tuple[InstanceResult, ...]
    launch_overhead: float = 0.0

    @property
    def winner(self) -> InstanceResult | None:
        for r in self.per_instance:
            if r.seed == self.winner_seed:
                return r
        return None

    @property
    def assignment(self) -> tuple[int, ...] | None:
        w = self.winner
        return None if w is None else w.assignment

    def max_loser_overrun(self) -> int:
        return max((r.overrun for r in self.per_instance if r.status == CANCELLED), default=0)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "SolveRecord":
        doc = json.loads(text)
        inst = []
        for r in doc.pop("per_instance"):
            a = r.pop("assignment")
            inst.append(InstanceResult(**r, assignment=None if a is None else tuple(a)))
        return cls(**doc, per_instance=tuple(inst))


def warm_up(m: ConstraintModel) -> None:
    """Compile the kernels and build the model tables before forking."""
    search_tables(m)
    solve(build_direct(2), SearchConfig(timeout=10.0))


def _race_worker(m, cfg, start, t_launch, stop, out):
    start.wait()
    res = solve(m, cfg, stop, t0=t_launch.value)
    if res.status == SAT:
        stop.set()
    out.put(InstanceResult(cfg.seed, res.status, res.elapsed, res.nodes, res.nodes_at_last_poll, res.assignment))


def race(
    m: ConstraintModel,
    M: int,
    seed_base: int = 0,
    timeout: float = 60.0,
    cfg: SearchConfig | None = None,
) -> SolveRecord:
    """Run M seeded instances until the first one succeeds, then cancel the rest."""
    if M < 1:
        raise ValueError("M must be >= 1")
    base = replace(cfg or SearchConfig(), timeout=timeout)
    seeds = [seed_base + k for k in range(M)]
    if M == 1:
        res = solve(m, replace(base, seed=seeds[0]))
        inst = (InstanceResult(seeds[0], res.status, res.elapsed, res.nodes, res.nodes_at_last_poll, res.assignment),)
        won = res.status == SAT
        return SolveRecord(m.n, m.kind, 1, seed_base, seeds[0] if won else None, res.elapsed if won else None, inst)

    warm_up(m)
    start, stop = _CTX.Event(), _CTX.Event()
    t_launch = _CTX.Value("d", 0.0)
    out = _CTX.Queue()
    t_spawn = time.perf_counter()
    procs = [
        _CTX.Process(target=_race_worker, args=(m, replace(base, seed=s), start, t_launch, stop, out), daemon=True)
        for s in seeds
    ]
    for p in procs:
        p.start()
    # CLOCK_MONOTONIC is shared by all processes, so one reading serves as the common launch.
    t_launch.value = time.perf_counter()
    start.set()
    results = []
    try:
        for _ in procs:
            results.append(out.get(timeout=timeout + 60.0))
    except queue.Empty:
        raise RuntimeError(f"only {len(results)} of {M} race workers reported back") from None
    finally:
        for p in procs:
            p.join(timeout=5.0)
            if p.is_alive():
                p.terminate()
    results.sort(key=lambda r: r.seed)
    sat = [r for r in results if r.status == SAT]
    first = min(sat, key=lambda r: r.elapsed) if sat else None
    return SolveRecord(
        m.n,
        m.kind,
        M,
        seed_base,
        None if first is None else first.seed,
        None if first is None else first.elapsed,
        tuple(results),
        t_launch.value - t_spawn,
    )


# -- single-run distributions ---------------------------------------------------

@dataclass(frozen=True)
class RunRecord:
    run_index: int
    seed: int
    status: str
    elapsed_seconds: float


@dataclass(frozen=True)
class EmpiricalCdf:
    """Right-continuous step function (#times <= t) / total_runs."""

    times: tuple[float, ...]
    total_runs: int
    cutoff: float
    runs: tuple[RunRecord, ...] = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if self.total_runs < len(self.times):
            raise ValueError("more completion times than runs")
        if list(self.times) != sorted(self.times):
            raise ValueError("completion times must be sorted")
        if self.times and self.times[-1] > self.cutoff:
            raise ValueError("completion time beyond the cutoff")

    @classmethod
    def from_runs(cls, runs, cutoff: float | None = None) -> "EmpiricalCdf":
        runs = tuple(runs)
        done = [r.elapsed_seconds for r in runs if r.status == SAT]
        if cutoff is None:
            cutoff = max((r.elapsed_seconds for r in runs), default=0.0)
        done = sorted(t for t in done if t <= cutoff)
        return cls(tuple(done), len(runs), float(cutoff), runs)

    @property
    def censored(self) -> int:
        return self.total_runs - len(self.times)

    def __call__(self, t):
        if self.total_runs == 0:
            raise ValueError("empty distribution")
        if np.ndim(t) == 0:
            return bisect.bisect_right(self.times, float(t)) / self.total_runs
        return np.searchsorted(np.asarray(self.times), np.asarray(t, dtype=float), side="right") / self.total_runs


def _single_run(args) -> RunRecord:
    m, cfg, k = args
    res = solve(m, cfg)
    return RunRecord(k, cfg.seed, res.status, res.elapsed)


def collect_runs(
    m: ConstraintModel,
    runs: int,
    cutoff: float,
    seed_base: int = 0,
    workers: int | None = None,
    cfg: SearchConfig | None = None,
) -> list[RunRecord]:
    if runs < 1 or cutoff <= 0:
        raise ValueError("need runs >= 1 and cutoff > 0")
    base = replace(cfg or SearchConfig(), timeout=cutoff)
    jobs = [(m, replace(base, seed=seed_base + k), k) for k in range(runs)]
    workers = default_workers() if workers is None else workers
    if workers <= 1 or runs == 1:
        return [_single_run(j) for j in jobs]
    warm_up(m)
    with ProcessPoolExecutor(workers, mp_context=_CTX) as pool:
        return list(pool.map(_single_run, jobs))


def collect_cdf(
    m: ConstraintModel,
    runs: int,
    cutoff: float,
    seed_base: int = 0,
    workers: int | None = None,
    cfg: SearchConfig | None = None,
) -> EmpiricalCdf:
    """Independent single solves with a common cutoff; censored runs count in total_runs."""
    return EmpiricalCdf.from_runs(collect_runs(m, runs, cutoff, seed_base, workers, cfg), cutoff)


def write_runs_csv(runs, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in runs:
            w.writerow((r.run_index, r.seed, r.status, repr(float(r.elapsed_seconds))))


def read_runs_csv(path: str | Path) -> list[RunRecord]:
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
        return [RunRecord(int(k), int(s), st, float(e)) for k, s, st, e in rd]
