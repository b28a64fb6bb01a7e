"""Seeded restarting backtracking search over cardinality models.

Propagation keeps two counters per constraint, the committed weight (sum over
variables fixed to 1) and the remaining weight (sum over unassigned ones):

* any unassigned variable whose weight exceeds ``2 - committed`` is forced to 0;
* in an equality, any unassigned variable without which ``2`` is no longer
  reachable is forced to 1.

The default branching rule picks the unsatisfied row equality with the fewest
ways to complete it and tries each completion in shuffled order.  All random
choices come from numpy's PCG64 bit generator seeded with ``SearchConfig.seed``
(raw 64-bit outputs, reduced modulo the range).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator

import numpy as np

from . import _kernels
from .model import BOUND, ConstraintModel

SAT, TIMEOUT, CANCELLED, UNSAT = "sat", "timeout", "cancelled", "unsat"
BRANCHING = ("row-pair", "activity")


@dataclass(frozen=True)
class RestartSchedule:
    """Node budgets between restarts: ``geometric``, ``luby`` or ``none``."""

    kind: str = "geometric"
    base: float = 1000
    factor: float = 1.5

    def __post_init__(self):
        if self.kind not in ("geometric", "luby", "none"):
            raise ValueError(f"unknown restart schedule {self.kind!r}")
        if self.base <= 0 or (self.kind == "geometric" and self.factor < 1):
            raise ValueError("restart parameters must be positive (factor >= 1)")

    def budgets(self) -> Iterator[float]:
        if self.kind == "none":
            while True:
                yield float("inf")
        k = 0
        while True:
            k += 1
            if self.kind == "geometric":
                yield max(1, round(self.base * self.factor ** (k - 1)))
            else:
                yield self.base * luby(k)


def luby(i: int) -> int:
    """The i-th term (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


@dataclass(frozen=True)
class SearchConfig:
    seed: int = 0
    timeout: float = 60.0
    restart_schedule: RestartSchedule = field(default_factory=RestartSchedule)
    branching: str = "row-pair"
    cancel_poll_interval: int = 64

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.branching not in BRANCHING:
            raise ValueError(f"branching must be one of {BRANCHING}")
        if self.cancel_poll_interval < 1:
            raise ValueError("cancel_poll_interval must be >= 1")


@dataclass
class SolveOutcome:
    status: str
    assignment: tuple[int, ...] | None
    elapsed: float
    nodes: int
    restarts: int
    # Decision count at the last poll that found no stop signal.
    nodes_at_last_poll: int = 0


class Rng:
    """Buffered draws from a PCG64 stream."""

    def __init__(self, seed: int, chunk: int = 1024):
        self._bits = np.random.PCG64(seed)
        self._chunk = chunk
        self._buf: list[int] = []

    def raw(self) -> int:
        if not self._buf:
            self._buf = self._bits.random_raw(self._chunk).tolist()[::-1]
        return self._buf.pop()

    def below(self, k: int) -> int:
        return self.raw() % k

    def shuffle(self, xs: list) -> None:
        for i in range(len(xs) - 1, 0, -1):
            j = self.raw() % (i + 1)
            xs[i], xs[j] = xs[j], xs[i]


def _tight_inequalities(m: ConstraintModel) -> set[int]:
    """Column inequalities that the row equalities force to equality.

    In the direct model the rows fix the total at ``2n`` and the ``n`` columns
    partition the grid with capacity 2 each, so every column holds exactly 2.
    """
    if m.kind != "direct":
        return set()
    out = set()
    for k, (vs, _) in enumerate(m.at_most_2):
        if len(vs) == m.n and len({m.var_names[v].i for v in vs}) == 1:
            out.add(k)
    rows_cover = sorted(v for vs, ws in m.exactly_2 if set(ws) == {1} for v in vs)
    if len(out) != m.n or rows_cover != list(range(m.num_vars)):
        return set()
    return out


class _Stopped(Exception):
    def __init__(self, status: str):
        self.status = status


@dataclass(frozen=True)
class _Tables:
    cptr: np.ndarray
    cvar: np.ndarray
    cwt: np.ndarray
    is_eq: np.ndarray
    maxw: np.ndarray
    eq_ids: np.ndarray
    vptr: np.ndarray
    vcon: np.ndarray
    vwt: np.ndarray
    rem0: np.ndarray


def search_tables(m: ConstraintModel) -> _Tables:
    """Flattened constraint/occurrence arrays, built once per model."""
    cached = m.__dict__.get("_search_tables")
    if cached is not None:
        return cached
    m.validate()
    tight = _tight_inequalities(m)
    rows = [(v, w, k in tight) for k, (v, w) in enumerate(m.at_most_2)]
    rows += [(v, w, True) for v, w in m.exactly_2]
    i64 = np.int64
    cptr = np.cumsum([0] + [len(r[0]) for r in rows]).astype(i64)
    cvar = np.array([v for r in rows for v in r[0]], i64)
    cwt = np.array([w for r in rows for w in r[1]], i64)
    is_eq = np.array([r[2] for r in rows], i64)
    con_of = np.repeat(np.arange(len(rows), dtype=i64), np.diff(cptr))
    order = np.argsort(cvar, kind="stable")
    t = _Tables(
        cptr=cptr,
        cvar=cvar,
        cwt=cwt,
        is_eq=is_eq,
        maxw=np.array([max(r[1]) if r[1] else 0 for r in rows], i64),
        eq_ids=np.flatnonzero(is_eq).astype(i64),
        vptr=np.concatenate([[0], np.cumsum(np.bincount(cvar, minlength=m.num_vars))]).astype(i64),
        vcon=con_of[order],
        vwt=cwt[order],
        rem0=np.bincount(con_of, weights=cwt, minlength=len(rows)).astype(i64),
    )
    object.__setattr__(m, "_search_tables", t)
    return t


class _Search:
    def __init__(self, m: ConstraintModel, cfg: SearchConfig, stop=None, restarts: bool = True, t0: float | None = None):
        self.m, self.cfg, self.stop = m, cfg, stop
        self.rng = Rng(cfg.seed)
        _kernels.warm()
        t = search_tables(m)
        self.cptr, self.cvar, self.cwt = t.cptr, t.cvar, t.cwt
        self.is_eq, self.maxw, self.eq_ids = t.is_eq, t.maxw, t.eq_ids
        self.vptr, self.vcon, self.vwt = t.vptr, t.vcon, t.vwt
        self.val = np.full(m.num_vars, -1, np.int64)
        self.com = np.zeros(len(t.rem0), np.int64)
        self.rem = t.rem0.copy()
        self.trail = np.zeros(m.num_vars, np.int64)
        self.ptr = np.zeros(2, np.int64)
        self.activity = np.zeros(m.num_vars)
        self.bump = 1.0
        self.use_restarts = restarts
        self.nodes = 0
        self.restarts = 0
        self.nodes_at_last_poll = 0
        self.t0 = time.perf_counter() if t0 is None else t0
        self.deadline = self.t0 + cfg.timeout

    # -- propagation --------------------------------------------------------

    def propagate(self, lits) -> int:
        """Assign ``lits`` and close under propagation; conflicting constraint or -1."""
        lv = np.array([v for v, _ in lits], np.int64)
        lb = np.array([b for _, b in lits], np.int64)
        return int(
            _kernels.propagate(
                lv, lb, self.cptr, self.cvar, self.cwt, self.vptr, self.vcon, self.vwt,
                self.is_eq, self.maxw, self.val, self.com, self.rem, self.trail, self.ptr,
            )
        )

    def undo(self, mark: int) -> None:
        _kernels.undo(mark, self.vptr, self.vcon, self.vwt, self.val, self.com, self.rem, self.trail, self.ptr)

    @property
    def depth(self) -> int:
        return int(self.ptr[0])

    def root_lits(self) -> list[tuple[int, int]]:
        lits = []
        for c in range(len(self.com)):
            a, b = self.cptr[c], self.cptr[c + 1]
            need = int(self.rem[c]) - BOUND
            for u, w in zip(self.cvar[a:b].tolist(), self.cwt[a:b].tolist()):
                if w > BOUND:
                    lits.append((u, 0))
                elif self.is_eq[c] and w > need:
                    lits.append((u, 1))
        return lits

    def on_conflict(self, c: int) -> None:
        if self.cfg.branching != "activity" or c >= len(self.com):
            return
        self.activity[self.cvar[self.cptr[c]:self.cptr[c + 1]]] += self.bump
        self.bump *= 1.05
        if self.bump > 1e100:
            self.activity *= 1e-100
            self.bump *= 1e-100

    # -- branching ----------------------------------------------------------

    def choices(self) -> list[list[tuple[int, int]]] | None:
        """Alternatives for the next decision; ``[]`` if stuck, ``None`` if complete."""
        alts = self._row_choices() if self.cfg.branching == "row-pair" else None
        if alts is not None:
            return alts
        free = np.flatnonzero(self.val == -1)
        if not len(free):
            return None
        if self.cfg.branching == "activity":
            act = self.activity[free]
            free = free[act == act.max()]
        v = int(free[self.rng.below(len(free))])
        alts = [[(v, 1)], [(v, 0)]]
        if self.cfg.branching == "row-pair":
            self.rng.shuffle(alts)
        return alts

    def _row_choices(self):
        counts = _kernels.completion_counts(self.eq_ids, self.cptr, self.cvar, self.cwt, self.val, self.com)
        open_ = counts >= 0
        if not open_.any():
            return None
        low = counts[open_].min()
        if low == 0:
            return []
        ties = np.flatnonzero(counts == low)
        c = int(self.eq_ids[ties[self.rng.below(len(ties))]])
        d = BOUND - int(self.com[c])
        a, b = self.cptr[c], self.cptr[c + 1]
        vs, ws = self.cvar[a:b], self.cwt[a:b]
        free = self.val[vs] == -1
        ones = vs[free & (ws == 1)].tolist()
        if d == 1:
            alts = [[(u, 1)] for u in ones]
        else:
            alts = [[(x, 1), (y, 1)] for x, y in combinations(ones, 2)]
            alts += [[(u, 1)] for u in vs[free & (ws == 2)].tolist()]
        self.rng.shuffle(alts)
        return alts

    # -- driver -------------------------------------------------------------

    def poll(self) -> None:
        if self.stop is not None and self.stop.is_set():
            raise _Stopped(CANCELLED)
        if time.perf_counter() >= self.deadline:
            raise _Stopped(TIMEOUT)
        self.nodes_at_last_poll = self.nodes

    def run(self) -> Iterator[tuple[int, ...]]:
        """Yield satisfying assignments; returns the final status."""
        budgets = self.cfg.restart_schedule.budgets() if self.use_restarts else iter(())
        budget = next(budgets, float("inf"))
        interval = self.cfg.cancel_poll_interval
        self.poll()
        c = self.propagate(self.root_lits())
        if c >= 0:
            return UNSAT
        root = self.depth
        since_restart = 0
        stack: list[list] = []
        descend = True
        while True:
            if descend:
                alts = self.choices()
                if alts is None:
                    sol = tuple(self.val.tolist())
                    if not self.m.is_satisfied(sol):
                        raise AssertionError("search produced an assignment that violates the model")
                    yield sol
                    descend = False
                    continue
                stack.append([self.depth, alts, 0])
                descend = False
            if not stack:
                return UNSAT
            frame = stack[-1]
            mark, alts, k = frame
            self.undo(mark)
            if k >= len(alts):
                stack.pop()
                continue
            frame[2] = k + 1
            self.nodes += 1
            since_restart += 1
            if self.nodes % interval == 0:
                self.poll()
            if since_restart > budget:
                self.undo(root)
                stack.clear()
                self.restarts += 1
                since_restart = 0
                budget = next(budgets, float("inf"))
                descend = True
                continue
            c = self.propagate(alts[k])
            if c >= 0:
                self.on_conflict(c)
            else:
                descend = True

    def outcome(self, status: str, assignment=None) -> SolveOutcome:
        return SolveOutcome(
            status,
            assignment,
            time.perf_counter() - self.t0,
            self.nodes,
            self.restarts,
            self.nodes_at_last_poll,
        )


def _drive(search: _Search) -> SolveOutcome:
    gen = search.run()
    try:
        sol = next(gen)
    except StopIteration as done:
        return search.outcome(done.value)
    except _Stopped as s:
        return search.outcome(s.status)
    return search.outcome(SAT, sol)


def solve(m: ConstraintModel, cfg: SearchConfig | None = None, stop=None, *, t0: float | None = None) -> SolveOutcome:
    """Randomised search with restarts.

    ``stop`` is anything with ``is_set()`` (a threading or multiprocessing
    Event); it is polled every ``cfg.cancel_poll_interval`` decisions.
    ``t0`` is a ``time.perf_counter()`` reading to measure elapsed time and
    the timeout from; it defaults to the call time.
    """
    return _drive(_Search(m, cfg or SearchConfig(), stop, restarts=True, t0=t0))


EXHAUSTIVE_VAR_LIMIT = 64


def _check_guard(m: ConstraintModel, force: bool) -> None:
    if m.num_vars > EXHAUSTIVE_VAR_LIMIT and not force:
        raise ValueError(
            f"exhaustive search on {m.num_vars} variables exceeds the guard of "
            f"{EXHAUSTIVE_VAR_LIMIT}; pass force=True to override"
        )


def solve_exhaustive(m: ConstraintModel, cfg: SearchConfig | None = None, stop=None, *, force: bool = False) -> SolveOutcome:
    """Complete search without restarts: ``sat`` with a witness or proven ``unsat``."""
    _check_guard(m, force)
    return _drive(_Search(m, cfg or SearchConfig(), stop, restarts=False))


def enumerate_solutions(m: ConstraintModel, cfg: SearchConfig | None = None, *, force: bool = False) -> list[tuple[int, ...]]:
    """Every satisfying assignment, via the complete search."""
    _check_guard(m, force)
    cfg = cfg or SearchConfig(timeout=3600.0)
    return list(_Search(m, cfg, None, restarts=False).run())
