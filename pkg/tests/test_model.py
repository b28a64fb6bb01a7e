import numpy as np
import pytest
from hypothesis import given, strategies as st

from n3il.geometry import count_lines, grid_points
from n3il.model import (
    ConstraintModel,
    LinearRows,
    build_direct,
    build_model,
    build_reduced,
    export_model,
    model_size_report,
    parse_model,
)
from n3il.verify import Configuration, verify

SMALL_TABLE = {
    2: (4, 1, 2, 2),
    3: (9, 2, 8, 3),
    4: (16, 4, 14, 6),
    5: (25, 6, 32, 12),
}


@pytest.mark.parametrize("n", sorted(SMALL_TABLE))
def test_size_rows_small(n):
    (row,) = model_size_report(n, n)
    assert (row.direct_vars, row.reduced_vars, row.direct_constraints, row.reduced_constraints) == SMALL_TABLE[n]


def test_size_report_rejects_bad_range():
    with pytest.raises(ValueError):
        model_size_report(5, 4)
    with pytest.raises(ValueError):
        model_size_report(1, 4)


def test_direct_n60_size():
    m = build_direct(60)
    assert (m.num_vars, m.num_constraints) == (3600, 546354)


def test_reduced_n60_size():
    m = build_reduced(60)
    assert (m.num_vars, m.num_constraints) == (900, 136660)


@pytest.mark.parametrize("n", range(3, 13))
def test_direct_constraints_equal_line_count(n):
    assert build_direct(n).num_constraints == count_lines(n, 3)


@pytest.mark.parametrize("n", range(2, 20))
def test_model_invariants(n):
    for m in (build_direct(n), build_reduced(n)):
        m.validate()
        assert m.infeasible_rows() == []
        assert len(m.exactly_2) == n
        assert (m.exactly_2.row_sums() >= 2).all()
        if len(m.at_most_2):
            assert (m.at_most_2.row_sums() > 2).all()
    assert build_reduced(n).num_vars == (n * n // 4 if n % 2 == 0 else (n * n - 1) // 4)


def test_direct_variable_order_is_row_major():
    m = build_direct(4)
    assert list(m.var_names) == grid_points(4)
    assert m.var_names[1 * 4 + 2] == (2, 1)


@given(st.integers(3, 8), st.data())
def test_direct_model_agrees_with_verifier(n, data):
    x = data.draw(st.lists(st.integers(0, 1), min_size=n * n, max_size=n * n))
    m = build_direct(n)
    c = Configuration.of(n, [p for p, v in zip(m.var_names, x) if v])
    expected = bool(verify(c, 2 * n, two_per_line=False)) and all(
        sum(p.j == r for p in c.points) == 2 for r in range(n)
    )
    assert m.is_satisfied(np.array(x)) == expected


def _row_config(n, rng):
    """Random configuration with exactly two points per row."""
    pts = []
    for j in range(n):
        for i in rng.choice(n, 2, replace=False):
            pts.append((int(i), j))
    return pts


@pytest.mark.parametrize("n", [4, 6, 10])
def test_verifier_equivalence_on_row_feasible_configs(n):
    rng = np.random.default_rng(n)
    m = build_direct(n)
    for _ in range(300):
        pts = _row_config(n, rng)
        x = np.zeros(n * n, np.int64)
        for i, j in pts:
            x[j * n + i] = 1
        assert m.is_satisfied(x) == bool(verify(Configuration.of(n, pts)))


def test_satisfying_assignments_have_two_per_column():
    # Every solution of the direct model at n=4 (11 of them) has two points per column.
    from n3il.search import enumerate_solutions

    m = build_direct(4)
    sols = enumerate_solutions(m)
    assert len(sols) > 0
    for x in sols:
        c = Configuration.of(4, m.occupied(x))
        assert verify(c, 8, two_per_line=True)


def test_opb_export_n2():
    text = export_model(build_direct(2), "opb").decode()
    lines = [ln for ln in text.splitlines() if not ln.startswith("*")]
    assert "#variable= 4" in text
    assert sum(ln.endswith("= 2 ;") and "<=" not in ln for ln in lines) == 2
    assert len(lines) == 2


def test_opb_export_n5_line_count():
    text = export_model(build_direct(5), "opb").decode()
    assert len([ln for ln in text.splitlines() if not ln.startswith("*")]) == 32


@pytest.mark.parametrize("fmt", ["opb", "text"])
@pytest.mark.parametrize("n,reduced", [(2, False), (5, False), (5, True), (8, True), (9, True)])
def test_export_round_trip(fmt, n, reduced):
    m = build_model(n, reduced)
    data = export_model(m, fmt)
    assert export_model(m, fmt) == data
    back = parse_model(data)
    assert back == m
    assert export_model(back, fmt) == data


def test_unknown_format_rejected():
    with pytest.raises(ValueError):
        export_model(build_direct(3), "lp")


def test_validate_catches_bad_models():
    good = build_direct(3)
    bad = ConstraintModel(3, "direct", 9, LinearRows.from_rows([([0, 1], [1, 1])]), good.exactly_2, good.var_names)
    with pytest.raises(ValueError, match="tautolog"):
        bad.validate()
    bad = ConstraintModel(3, "direct", 9, LinearRows.from_rows([([0, 12, 3], [1, 1, 1])]), good.exactly_2, good.var_names)
    with pytest.raises(ValueError, match="outside"):
        bad.validate()


def test_infeasible_rows_flagged(caplog):
    from n3il.model import _finish

    good = build_direct(3)
    eq = LinearRows.from_rows([([0], [1])] + [good.exactly_2.row(k) for k in (1, 2)])
    m = _finish(ConstraintModel(3, "direct", 9, good.at_most_2, eq, good.var_names))
    assert m.infeasible_rows() == [0]
    assert "infeasible" in caplog.text
