"""Direct and symmetry-reduced satisfiability models, sizes, and file export.

Both models are pure cardinality systems: binary variables, weighted
``sum <= 2`` line inequalities and weighted ``sum == 2`` row equalities.
Variables are indexed row-major: ``j * n + i`` over the grid for the direct
model, and in :func:`fundamental_domain` order for the reduced model.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .geometry import GridPoint, check_grid_args, grid_points, line_arrays
from .symmetry import build_orbit_map, reduced_line_constraints, row_coefficients

log = logging.getLogger(__name__)

BOUND = 2
MODEL_FORMAT = "n3il-model/1"


@dataclass(frozen=True)
class LinearRows:
    """Compressed sparse rows of weighted 0/1 sums."""

    indptr: np.ndarray
    index: np.ndarray
    weight: np.ndarray

    @classmethod
    def from_rows(cls, rows) -> "LinearRows":
        indptr = [0]
        index: list[int] = []
        weight: list[int] = []
        for vars_, ws in rows:
            index.extend(vars_)
            weight.extend(ws)
            indptr.append(len(index))
        return cls(np.asarray(indptr, np.int64), np.asarray(index, np.int64), np.asarray(weight, np.int64))

    def __len__(self) -> int:
        return len(self.indptr) - 1

    def row(self, k: int) -> tuple[list[int], list[int]]:
        a, b = self.indptr[k], self.indptr[k + 1]
        return self.index[a:b].tolist(), self.weight[a:b].tolist()

    def __iter__(self) -> Iterator[tuple[list[int], list[int]]]:
        idx, w, ptr = self.index.tolist(), self.weight.tolist(), self.indptr.tolist()
        for a, b in zip(ptr[:-1], ptr[1:]):
            yield idx[a:b], w[a:b]

    def _row_ids(self) -> np.ndarray:
        return np.repeat(np.arange(len(self)), np.diff(self.indptr))

    def row_sums(self) -> np.ndarray:
        return self.evaluate(np.ones(int(self.index.max(initial=-1)) + 1, np.int64))

    def evaluate(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        prod = self.weight * x[self.index]
        return np.bincount(self._row_ids(), weights=prod, minlength=len(self)).astype(np.int64)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearRows):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f)) for f in ("indptr", "index", "weight"))


@dataclass(frozen=True, eq=False)
class ConstraintModel:
    n: int
    kind: str
    num_vars: int
    at_most_2: LinearRows
    exactly_2: LinearRows
    var_names: tuple[GridPoint, ...] = field(repr=False)

    @property
    def num_constraints(self) -> int:
        return len(self.at_most_2) + len(self.exactly_2)

    def infeasible_rows(self) -> list[int]:
        """Equalities whose full weight cannot reach the bound."""
        return np.flatnonzero(self.exactly_2.row_sums() < BOUND).tolist()

    def validate(self) -> None:
        if self.kind not in ("direct", "reduced"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.var_names) != self.num_vars:
            raise ValueError("var_names does not cover every variable")
        for name, rows in (("at_most_2", self.at_most_2), ("exactly_2", self.exactly_2)):
            if len(rows.index) and (rows.index.min() < 0 or rows.index.max() >= self.num_vars):
                raise ValueError(f"{name} references a variable outside [0, {self.num_vars})")
            if len(rows.weight) and rows.weight.min() < 1:
                raise ValueError(f"{name} has a non-positive weight")
            if len(rows.indptr) < 1 or rows.indptr[0] != 0 or np.any(np.diff(rows.indptr) < 0):
                raise ValueError(f"{name} has a malformed row pointer")
        if len(self.at_most_2) and self.at_most_2.row_sums().min() <= BOUND:
            raise ValueError("at_most_2 contains a tautological inequality")

    def is_satisfied(self, x) -> bool:
        x = np.asarray(x)
        if x.shape != (self.num_vars,) or not np.isin(x, (0, 1)).all():
            return False
        return bool(np.all(self.at_most_2.evaluate(x) <= BOUND) and np.all(self.exactly_2.evaluate(x) == BOUND))

    def occupied(self, x) -> set[GridPoint]:
        """Grid sites switched on by assignment ``x`` (orbits expanded)."""
        if self.kind == "direct":
            return {self.var_names[k] for k, v in enumerate(x) if v}
        return build_orbit_map(self.n).expand(x)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ConstraintModel):
            return NotImplemented
        return (
            (self.n, self.kind, self.num_vars, self.var_names)
            == (other.n, other.kind, other.num_vars, other.var_names)
            and self.at_most_2 == other.at_most_2
            and self.exactly_2 == other.exactly_2
        )


def _finish(m: ConstraintModel) -> ConstraintModel:
    bad = m.infeasible_rows()
    if bad:
        log.warning("%s model n=%d: rows %s cannot reach 2; model is infeasible", m.kind, m.n, bad)
    return m


def build_direct(n: int) -> ConstraintModel:
    check_grid_args(n)
    idx, ptr = [], [0]
    for rows in line_arrays(n, 3).values():
        horiz = np.all(rows // n == rows[:, :1] // n, axis=1)
        rows = rows[~horiz]
        idx.append(rows.ravel())
        ptr.extend([rows.shape[1]] * rows.shape[0])
    index = np.concatenate(idx) if idx else np.zeros(0, np.int64)
    lines = LinearRows(np.cumsum(ptr).astype(np.int64), index.astype(np.int64), np.ones(len(index), np.int64))
    eq = LinearRows.from_rows(([j * n + i for i in range(n)], [1] * n) for j in range(n))
    return _finish(ConstraintModel(n, "direct", n * n, lines, eq, tuple(grid_points(n))))


def build_reduced(n: int, *, dedup: bool = True) -> ConstraintModel:
    check_grid_args(n)
    om = build_orbit_map(n)
    lines = LinearRows.from_rows((r.vars, r.weights) for r in reduced_line_constraints(n, om, dedup=dedup))
    eq = LinearRows.from_rows((list(d), list(d.values())) for d in row_coefficients(om))
    return _finish(ConstraintModel(n, "reduced", len(om), lines, eq, tuple(om.representatives)))


def build_model(n: int, reduced: bool = False) -> ConstraintModel:
    return build_reduced(n) if reduced else build_direct(n)


# -- export / import ---------------------------------------------------------

def _opb_terms(vars_, ws) -> str:
    return " ".join(f"+{w} x{v + 1}" for v, w in zip(vars_, ws))


def export_model(m: ConstraintModel, fmt: str = "opb") -> bytes:
    if fmt == "opb":
        lines = [
            f"* #variable= {m.num_vars} #constraint= {m.num_constraints}",
            f"* n3il kind={m.kind} n={m.n}",
        ]
        lines += [f"{_opb_terms(v, w)} = 2 ;" for v, w in m.exactly_2]
        lines += [f"{_opb_terms(v, w)} <= 2 ;" for v, w in m.at_most_2]
        return ("\n".join(lines) + "\n").encode()
    if fmt in ("text", "structured-text", "json"):
        doc = {
            "format": MODEL_FORMAT,
            "n": m.n,
            "kind": m.kind,
            "num_vars": m.num_vars,
            "var_names": [list(p) for p in m.var_names],
            "exactly_2": [[v, w] for v, w in m.exactly_2],
            "at_most_2": [[v, w] for v, w in m.at_most_2],
        }
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode()
    raise ValueError(f"unknown model format {fmt!r}; expected 'opb' or 'text'")


_TERM = re.compile(r"([+-]?\d+)\s+x(\d+)")


def parse_model(data: bytes | str) -> ConstraintModel:
    """Read either export format back into a :class:`ConstraintModel`."""
    text = data.decode() if isinstance(data, bytes) else data
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        if doc.get("format") != MODEL_FORMAT:
            raise ValueError(f"not an {MODEL_FORMAT} document")
        m = ConstraintModel(
            doc["n"],
            doc["kind"],
            doc["num_vars"],
            LinearRows.from_rows(doc["at_most_2"]),
            LinearRows.from_rows(doc["exactly_2"]),
            tuple(GridPoint(*p) for p in doc["var_names"]),
        )
        m.validate()
        return m
    header = re.search(r"^\* n3il kind=(\w+) n=(\d+)", text, re.M)
    if not header:
        raise ValueError("OPB input lacks the '* n3il kind=... n=...' header")
    kind, n = header.group(1), int(header.group(2))
    le, eq = [], []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("*"):
            continue
        body, _, _ = line.partition(";")
        for op, target in (("<=", le), ("=", eq)):
            if op in body:
                lhs, rhs = body.split(op)
                if int(rhs) != BOUND:
                    raise ValueError(f"unsupported right-hand side in {line!r}")
                terms = [(int(x) - 1, int(w)) for w, x in _TERM.findall(lhs)]
                target.append(([t[0] for t in terms], [t[1] for t in terms]))
                break
        else:
            raise ValueError(f"unparseable OPB line {line!r}")
    ref = build_model(n, reduced=(kind == "reduced"))
    m = ConstraintModel(n, kind, ref.num_vars, LinearRows.from_rows(le), LinearRows.from_rows(eq), ref.var_names)
    m.validate()
    return m


# -- size report -------------------------------------------------------------

@dataclass(frozen=True)
class SizeRow:
    n: int
    direct_vars: int
    reduced_vars: int
    direct_constraints: int
    reduced_constraints: int


def model_size_report(n_min: int, n_max: int) -> list[SizeRow]:
    if not 2 <= n_min <= n_max:
        raise ValueError(f"need 2 <= n_min <= n_max, got {n_min}, {n_max}")
    out = []
    for n in range(n_min, n_max + 1):
        d, r = build_direct(n), build_reduced(n)
        out.append(SizeRow(n, d.num_vars, r.num_vars, d.num_constraints, r.num_constraints))
    return out
