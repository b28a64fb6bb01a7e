"""Rotation orbits of the grid and the orbit-variable form of line constraints.

The rotation is ``rho(i, j) = (j, n - 1 - i)``.  For even ``n`` every site
lies in a 4-cycle of ``rho``.  For odd ``n`` the anti-diagonal is fixed to
zero and main-diagonal sites are paired only by ``rho**2``; the symmetry group
acting on lines is ``<rho>`` for even ``n`` and ``<rho**2>`` for odd ``n``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import GridPoint, LineIncidence, canonical_key, check_grid_args, in_grid, line_arrays


def rotate(p, n: int) -> GridPoint:
    if not in_grid(p, n):
        raise ValueError(f"point {tuple(p)} outside the {n}x{n} grid")
    return GridPoint(p[1], n - 1 - p[0])


def rotate_power(p, n: int, k: int) -> GridPoint:
    for _ in range(k % 4):
        p = rotate(p, n)
    return GridPoint(*p)


def group_powers(n: int) -> tuple[int, ...]:
    """Non-identity powers of ``rho`` in the line symmetry group."""
    return (1, 2, 3) if n % 2 == 0 else (2,)


def fundamental_domain(n: int) -> list[GridPoint]:
    """Orbit representatives, row-major (row ``j`` outer, column ``i`` inner)."""
    if n % 2 == 0:
        w = h = n // 2
    else:
        w, h = (n + 1) // 2, (n - 1) // 2
    return [GridPoint(i, j) for j in range(h) for i in range(w)]


def orbit_of_rep(rep, n: int) -> list[GridPoint]:
    i, j = rep
    if n % 2 == 1 and i == j:
        return [GridPoint(i, i), GridPoint(n - 1 - i, n - 1 - i)]
    out = [GridPoint(i, j)]
    for _ in range(3):
        out.append(rotate(out[-1], n))
    return out


@dataclass(frozen=True)
class OrbitMap:
    n: int
    orbits: tuple[tuple[GridPoint, tuple[GridPoint, ...]], ...]
    fixed_zero: tuple[GridPoint, ...]
    site_to_orbit: dict[GridPoint, int] = field(repr=False)

    @property
    def parity(self) -> str:
        return "even" if self.n % 2 == 0 else "odd"

    @property
    def representatives(self) -> list[GridPoint]:
        return [rep for rep, _ in self.orbits]

    def __len__(self) -> int:
        return len(self.orbits)

    def orbit_array(self) -> np.ndarray:
        """Flat id ``j * n + i`` -> orbit index, ``-1`` on fixed-zero sites."""
        n = self.n
        out = np.full(n * n, -1, dtype=np.int64)
        for p, k in self.site_to_orbit.items():
            out[p.j * n + p.i] = k
        return out

    def expand(self, orbit_values) -> set[GridPoint]:
        """Occupied sites for a 0/1 vector over orbits."""
        return {p for k, v in enumerate(orbit_values) if v for p in self.orbits[k][1]}


def build_orbit_map(n: int) -> OrbitMap:
    check_grid_args(n)
    fixed = tuple(GridPoint(i, n - 1 - i) for i in range(n)) if n % 2 else ()
    orbits = []
    site_to_orbit: dict[GridPoint, int] = {}
    for k, rep in enumerate(fundamental_domain(n)):
        members = tuple(orbit_of_rep(rep, n))
        orbits.append((rep, members))
        for p in members:
            if p in site_to_orbit:
                raise AssertionError(f"orbits overlap at {p}")
            site_to_orbit[p] = k
    return OrbitMap(n, tuple(orbits), fixed, site_to_orbit)


def rotate_line(line: LineIncidence, n: int, k: int) -> LineIncidence:
    return LineIncidence.from_points(rotate_power(p, n, k) for p in line.points)


def line_orbit_representatives(n: int, lines) -> list[LineIncidence]:
    """Key-least member of every symmetry-group orbit of ``lines``."""
    best: dict[bytes, LineIncidence] = {}
    for line in lines:
        images = [line] + [rotate_line(line, n, k) for k in group_powers(n)]
        rep = min(images, key=lambda ln: ln.canonical_key)
        best.setdefault(rep.canonical_key, rep)
    return [best[k] for k in sorted(best)]


def orbit_has_horizontal(line: LineIncidence, n: int) -> bool:
    images = [line] + [rotate_line(line, n, k) for k in group_powers(n)]
    return any(len({p.j for p in img.points}) == 1 for img in images)


@dataclass(frozen=True)
class ReducedLine:
    source: LineIncidence
    coeffs: dict[int, int]


class _Tautology:
    def __repr__(self) -> str:
        return "TAUTOLOGY"


TAUTOLOGY = _Tautology()


def reduce_line(line: LineIncidence, om: OrbitMap):
    coeffs: dict[int, int] = {}
    for p in line.points:
        k = om.site_to_orbit.get(p)
        if k is not None:
            coeffs[k] = coeffs.get(k, 0) + 1
    if sum(coeffs.values()) <= 2:
        return TAUTOLOGY
    return ReducedLine(line, dict(sorted(coeffs.items())))


def row_coefficients(om: OrbitMap) -> list[dict[int, int]]:
    rows: list[dict[int, int]] = [{} for _ in range(om.n)]
    for k, (_, members) in enumerate(om.orbits):
        for p in members:
            rows[p.j][k] = rows[p.j].get(k, 0) + 1
    return [dict(sorted(r.items())) for r in rows]


# Vectorised path used by the model builder; tests pin it to the object API above.

def _rotation_table(n: int) -> np.ndarray:
    p = np.arange(n * n)
    j, i = np.divmod(p, n)
    return (n - 1 - i) * n + j


def _key_rank(ids: np.ndarray, n: int) -> np.ndarray:
    # Same order as comparing canonical keys byte by byte (LE uint16 i, then j).
    j, i = np.divmod(ids, n)
    return ((i & 255) << 24) | ((i >> 8) << 16) | ((j & 255) << 8) | (j >> 8)


def _sort_lex(ids: np.ndarray, n: int) -> np.ndarray:
    j, i = np.divmod(ids, n)
    order = np.argsort(i * n + j, axis=1, kind="stable")
    return np.take_along_axis(ids, order, axis=1)


def _rowwise_cmp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a != b
    first = diff.argmax(axis=1)
    idx = np.arange(a.shape[0])
    less = a[idx, first] < b[idx, first]
    return np.where(diff.any(axis=1), np.where(less, -1, 1), 0)


@dataclass(frozen=True)
class ReducedRow:
    vars: tuple[int, ...]
    weights: tuple[int, ...]
    key: bytes


def reduced_line_constraints(
    n: int,
    om: OrbitMap | None = None,
    *,
    dedup: bool = True,
    drop_horizontal_orbits: bool = True,
) -> list[ReducedRow]:
    """Non-tautological reduced line inequalities, one per line orbit.

    Rows come out sorted by the canonical key of their source representative;
    with ``dedup`` the key-least representative of each incidence vector wins.
    """
    om = om or build_orbit_map(n)
    orbit_of = om.orbit_array()
    rot = _rotation_table(n)
    powers = group_powers(n)
    kept: list[tuple[bytes, tuple[int, ...]]] = []
    for rows in line_arrays(n, 3).values():
        own = _key_rank(rows, n)
        is_rep = np.ones(rows.shape[0], dtype=bool)
        horiz = np.all(rows // n == (rows[:, :1] // n), axis=1)
        cur = rows
        for k in range(1, 4):
            cur = rot[cur]
            if k not in powers:
                continue
            img = _sort_lex(cur, n)
            is_rep &= _rowwise_cmp(own, _key_rank(img, n)) <= 0
            horiz |= np.all(img // n == (img[:, :1] // n), axis=1)
        keep = is_rep & ~horiz if drop_horizontal_orbits else is_rep
        sel = rows[keep]
        o = np.sort(orbit_of[sel], axis=1)
        nontaut = (o >= 0).sum(axis=1) > 2
        sel, o = sel[nontaut], o[nontaut]
        j, i = np.divmod(sel, n)
        packed = np.stack([i, j], axis=-1).astype("<u2")
        for r in range(sel.shape[0]):
            kept.append((packed[r].tobytes(), tuple(x for x in o[r].tolist() if x >= 0)))
    kept.sort(key=lambda t: t[0])
    out = []
    seen: set[tuple[int, ...]] = set()
    for key, multiset in kept:
        if dedup:
            if multiset in seen:
                continue
            seen.add(multiset)
        vars_: list[int] = []
        weights: list[int] = []
        for v in multiset:
            if vars_ and vars_[-1] == v:
                weights[-1] += 1
            else:
                vars_.append(v)
                weights.append(1)
        out.append(ReducedRow(tuple(vars_), tuple(weights), key))
    return out


def line_key_points(key: bytes) -> list[GridPoint]:
    arr = np.frombuffer(key, dtype="<u2").reshape(-1, 2)
    return [GridPoint(int(i), int(j)) for i, j in arr]


__all__ = [
    "OrbitMap",
    "ReducedLine",
    "ReducedRow",
    "TAUTOLOGY",
    "build_orbit_map",
    "canonical_key",
    "fundamental_domain",
    "group_powers",
    "line_orbit_representatives",
    "orbit_has_horizontal",
    "orbit_of_rep",
    "reduce_line",
    "reduced_line_constraints",
    "rotate",
    "rotate_power",
    "row_coefficients",
]
