import threading
import time
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from n3il.geometry import GridPoint
from n3il.model import ConstraintModel, LinearRows, build_direct, build_model, build_reduced
from n3il.search import (
    CANCELLED,
    SAT,
    TIMEOUT,
    UNSAT,
    RestartSchedule,
    Rng,
    SearchConfig,
    enumerate_solutions,
    luby,
    solve,
    solve_exhaustive,
)
from n3il.verify import Configuration, verify


def brute_force_solutions(m):
    """All satisfying 0/1 vectors by enumerating the 2^k cube."""
    if m.num_vars == 0:
        return [()]
    cube = np.array(list(product((0, 1), repeat=m.num_vars)), dtype=np.int64)
    ok = np.ones(len(cube), dtype=bool)
    for rows, cmp in ((m.at_most_2, np.less_equal), (m.exactly_2, np.equal)):
        for vars_, ws in rows:
            lhs = cube[:, vars_] @ np.asarray(ws, np.int64) if vars_ else np.zeros(len(cube), np.int64)
            ok &= cmp(lhs, 2)
    return sorted(tuple(int(v) for v in x) for x in cube[ok])


def assert_verified(m, assignment):
    c = Configuration.of(m.n, m.occupied(assignment))
    v = verify(c, 2 * m.n, two_per_line=True)
    assert v, v


# -- oracles -----------------------------------------------------------------

SMALL_MODELS = [(n, False) for n in (2, 3, 4)] + [(n, True) for n in range(2, 9)]


@pytest.mark.parametrize("n,reduced", SMALL_MODELS)
def test_exhaustive_enumeration_matches_brute_force(n, reduced):
    m = build_model(n, reduced)
    assert m.num_vars <= 16
    assert sorted(enumerate_solutions(m)) == brute_force_solutions(m)


def random_model(draw):
    k = draw(st.integers(1, 10))

    def row():
        vs = sorted(draw(st.lists(st.integers(0, k - 1), min_size=1, max_size=k, unique=True)))
        ws = draw(st.lists(st.integers(1, 2), min_size=len(vs), max_size=len(vs)))
        return vs, ws

    le = [r for r in (row() for _ in range(draw(st.integers(0, 6)))) if sum(r[1]) > 2]
    eq = [row() for _ in range(draw(st.integers(0, 3)))]
    names = tuple(GridPoint(v, 0) for v in range(k))
    return ConstraintModel(k, "direct", k, LinearRows.from_rows(le), LinearRows.from_rows(eq), names)


@given(st.data())
@settings(max_examples=150)
def test_propagation_is_complete_on_random_cardinality_models(data):
    m = random_model(data.draw)
    sols = sorted(enumerate_solutions(m))
    assert sols == brute_force_solutions(m)
    res = solve_exhaustive(m)
    assert res.status == (SAT if sols else UNSAT)
    if sols:
        assert res.assignment in sols


def test_exhaustive_reduced_5_matches_cube():
    m = build_reduced(5)
    res = solve_exhaustive(m)
    expected = brute_force_solutions(m)
    assert res.status == (SAT if expected else UNSAT)
    if expected:
        assert res.assignment in expected


def test_exhaustive_detects_injected_contradiction():
    base = build_direct(3)
    forced = [([3 * k + k], [2]) for k in range(3)]  # occupy the main diagonal
    m = ConstraintModel(3, "direct", 9, base.at_most_2,
                        LinearRows.from_rows(list(base.exactly_2) + forced), base.var_names)
    assert solve_exhaustive(m).status == UNSAT
    assert solve_exhaustive(build_direct(2)).status == SAT


# -- randomised solving ------------------------------------------------------

@pytest.mark.parametrize("seed", [0, 1, 7, 2**63 + 5])
def test_direct_2_fills_the_grid(seed):
    res = solve(build_direct(2), SearchConfig(seed=seed))
    assert res.status == SAT and res.assignment == (1, 1, 1, 1)


@pytest.mark.parametrize("seed", range(4))
def test_direct_3_gives_six_points(seed):
    m = build_direct(3)
    res = solve(m, SearchConfig(seed=seed))
    assert res.status == SAT and sum(res.assignment) == 6
    assert_verified(m, res.assignment)


@pytest.mark.parametrize("branching", ["row-pair", "activity"])
def test_reduced_10_seed_sweep(branching):
    m = build_reduced(10)
    for seed in range(8):
        res = solve(m, SearchConfig(seed=seed, timeout=30, branching=branching))
        assert res.status == SAT
        assert_verified(m, res.assignment)


@pytest.mark.parametrize("kind", ["geometric", "luby", "none"])
def test_restart_schedules_all_solve(kind):
    m = build_reduced(12)
    cfg = SearchConfig(seed=3, timeout=30, restart_schedule=RestartSchedule(kind, base=50))
    res = solve(m, cfg)
    assert res.status == SAT
    assert_verified(m, res.assignment)


def test_same_seed_same_outcome():
    m = build_reduced(14)
    a = solve(m, SearchConfig(seed=11))
    b = solve(m, SearchConfig(seed=11))
    assert (a.status, a.assignment, a.nodes, a.restarts) == (b.status, b.assignment, b.nodes, b.restarts)
    c = solve_exhaustive(build_reduced(8), SearchConfig(seed=4))
    d = solve_exhaustive(build_reduced(8), SearchConfig(seed=4))
    assert (c.assignment, c.nodes) == (d.assignment, d.nodes)


def test_seed_sensitivity_at_12():
    m = build_reduced(12)
    nodes = [solve(m, SearchConfig(seed=s)).nodes for s in range(32)]
    assert len(set(nodes)) > 5


def test_timeout_status():
    res = solve(build_direct(16), SearchConfig(seed=0, timeout=0.05))
    assert res.status == TIMEOUT
    assert res.assignment is None
    assert res.elapsed < 1.0


def test_preset_stop_cancels_immediately():
    ev = threading.Event()
    ev.set()
    res = solve(build_reduced(20), SearchConfig(), ev)
    assert res.status == CANCELLED and res.nodes == 0


def test_stop_from_another_thread_within_poll_interval():
    ev = threading.Event()
    out = {}
    cfg = SearchConfig(seed=1, timeout=60, cancel_poll_interval=32)
    t = threading.Thread(target=lambda: out.update(r=solve(build_direct(16), cfg, ev)))
    t.start()
    time.sleep(0.3)
    ev.set()
    t.join(10)
    res = out["r"]
    assert res.status == CANCELLED
    assert 0 <= res.nodes - res.nodes_at_last_poll <= cfg.cancel_poll_interval


def test_concurrent_solves_match_sequential():
    m = build_reduced(12)
    seq = [solve(m, SearchConfig(seed=s)).assignment for s in range(6)]
    par = [None] * 6
    def work(s):
        par[s] = solve(m, SearchConfig(seed=s)).assignment
    threads = [threading.Thread(target=work, args=(s,)) for s in range(6)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    assert par == seq


def test_exhaustive_guard():
    with pytest.raises(ValueError, match="guard"):
        solve_exhaustive(build_reduced(20))
    assert solve_exhaustive(build_reduced(20), SearchConfig(timeout=0.01), force=True).status in (SAT, TIMEOUT)


def test_malformed_model_rejected():
    bad = ConstraintModel(2, "direct", 4, LinearRows.from_rows([]), LinearRows.from_rows([([0, 9], [1, 1])]),
                          tuple(GridPoint(i, j) for j in range(2) for i in range(2)))
    with pytest.raises(ValueError):
        solve(bad)


@pytest.mark.parametrize("kwargs", [dict(timeout=0), dict(seed=-1), dict(seed=2**64), dict(branching="dom"),
                                    dict(cancel_poll_interval=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SearchConfig(**kwargs)


def test_restart_schedule_values():
    assert [luby(i) for i in range(1, 16)] == [1, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8]
    g = RestartSchedule("geometric", 1000, 1.5).budgets()
    assert [next(g) for _ in range(4)] == [1000, 1500, 2250, 3375]
    with pytest.raises(ValueError):
        RestartSchedule("fibonacci")


def test_rng_reference_outputs():
    r = Rng(0)
    assert [r.raw() for _ in range(3)] == [11749869230777074271, 4976686463289251617, 755828109848996024]
    r = Rng(42)
    assert r.raw() == 14276969152011380360


@given(st.integers(0, 2**64 - 1), st.integers(1, 1000))
def test_rng_below_in_range(seed, k):
    r = Rng(seed)
    assert all(0 <= r.below(k) < k for _ in range(20))


@given(st.integers(0, 2**32), st.lists(st.integers(), max_size=30))
def test_rng_shuffle_is_permutation(seed, xs):
    ys = list(xs)
    Rng(seed).shuffle(ys)
    assert sorted(ys) == sorted(xs)


def symmetric_configuration_exists(n):
    """Independent oracle: backtrack over rotation orbits with exact collinearity checks only."""
    from n3il.geometry import collinear
    from n3il.symmetry import build_orbit_map

    orbits = [list(ms) for _, ms in build_orbit_map(n).orbits]
    last = {}
    for k, ms in enumerate(orbits):
        for p in ms:
            last[p.j] = k
    closes = [[r for r, k2 in last.items() if k2 == k] for k in range(len(orbits))]
    rows = [0] * n
    pts = []

    def fits(new):
        for r in {q.j for q in new}:
            if rows[r] + sum(q.j == r for q in new) > 2:
                return False
        cand = pts + new
        for c in range(len(pts), len(cand)):
            for a in range(c):
                for b in range(a + 1, c):
                    if collinear(cand[a], cand[b], cand[c]):
                        return False
        return True

    def go(k):
        if k == len(orbits):
            return True
        new = orbits[k]
        if fits(new):
            for q in new:
                rows[q.j] += 1
            pts.extend(new)
            if all(rows[r] == 2 for r in closes[k]) and go(k + 1):
                return True
            del pts[-len(new):]
            for q in new:
                rows[q.j] -= 1
        return all(rows[r] == 2 for r in closes[k]) and go(k + 1)

    return go(0)


@pytest.mark.parametrize("n", [3, 5, 7, 9, 11, 13])
def test_reduced_odd_feasibility_matches_orbit_oracle(n):
    res = solve(build_reduced(n), SearchConfig(seed=n, timeout=60))
    assert res.status in (SAT, UNSAT)
    assert (res.status == SAT) == symmetric_configuration_exists(n)
