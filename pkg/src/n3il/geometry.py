"""Lattice points and maximal collinear subsets of the n x n grid.

Points are addressed either as ``GridPoint(i, j)`` (column ``i``, row ``j``)
or, internally, by the flat row-major id ``j * n + i``.  Lines are enumerated
once per primitive direction from their lexicographically least point, so the
walk order along a line is already sorted by ``(i, j)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Iterator, NamedTuple

import numpy as np


class GridPoint(NamedTuple):
    i: int
    j: int


@dataclass(frozen=True)
class LineIncidence:
    """A maximal collinear point set, sorted by ``(i, j)``."""

    points: tuple[GridPoint, ...]
    canonical_key: bytes = field(repr=False)

    @classmethod
    def from_points(cls, points) -> "LineIncidence":
        pts = tuple(sorted(GridPoint(int(i), int(j)) for i, j in points))
        return cls(pts, canonical_key(pts))

    def __len__(self) -> int:
        return len(self.points)


def canonical_key(points) -> bytes:
    """Sorted point list as little-endian uint16 ``(i, j)`` pairs."""
    arr = np.array(sorted((int(i), int(j)) for i, j in points), dtype="<u2")
    return arr.tobytes()


def check_grid_args(n: int, q: int = 3) -> None:
    if n < 2:
        raise ValueError(f"grid size must be >= 2, got {n}")
    if q < 2:
        raise ValueError(f"minimum multiplicity must be >= 2, got {q}")


def in_grid(p: GridPoint, n: int) -> bool:
    return 0 <= p[0] < n and 0 <= p[1] < n


def grid_points(n: int) -> list[GridPoint]:
    """All points of the grid in row-major order (flat id ``j * n + i``)."""
    return [GridPoint(i, j) for j in range(n) for i in range(n)]


def collinear(p, r, s) -> bool:
    return (r[0] - p[0]) * (s[1] - p[1]) - (r[1] - p[1]) * (s[0] - p[0]) == 0


def primitive_directions(n: int, q: int = 3) -> Iterator[tuple[int, int]]:
    """Primitive ``(a, b)`` with ``a > 0`` or ``(a, b) == (0, 1)``.

    Only directions that can carry ``q`` grid points are yielded.
    """
    reach = (n - 1) // (q - 1)
    yield 0, 1
    for a in range(1, reach + 1):
        for b in range(-reach, reach + 1):
            if gcd(a, abs(b)) == 1:
                yield a, b


def _direction_starts(n: int, a: int, b: int) -> tuple[np.ndarray, np.ndarray]:
    """Start points (flat ids) and line lengths for all lines along ``(a, b)``."""
    jj, ii = np.divmod(np.arange(n * n), n)
    pi, pj = ii - a, jj - b
    start = (pi < 0) | (pi >= n) | (pj < 0) | (pj >= n)
    big = n + 1
    steps_i = (n - 1 - ii) // a if a > 0 else np.full(n * n, big)
    if b > 0:
        steps_j = (n - 1 - jj) // b
    elif b < 0:
        steps_j = jj // (-b)
    else:
        steps_j = np.full(n * n, big)
    length = np.minimum(steps_i, steps_j) + 1
    ids = np.flatnonzero(start)
    return ids, length[ids]


def line_arrays(n: int, q: int = 3) -> dict[int, np.ndarray]:
    """All maximal lines with ``>= q`` points, grouped by length.

    Returns ``{L: array of shape (m, L)}`` of flat ids; each row lists one
    line's points sorted by ``(i, j)``.  Rows follow direction enumeration
    order, not key order.
    """
    check_grid_args(n, q)
    chunks: dict[int, list[np.ndarray]] = {}
    for a, b in primitive_directions(n, q):
        starts, lengths = _direction_starts(n, a, b)
        step = b * n + a
        for L in np.unique(lengths[lengths >= q]):
            s = starts[lengths == L]
            chunks.setdefault(int(L), []).append(s[:, None] + step * np.arange(L))
    return {L: np.concatenate(c) for L, c in sorted(chunks.items())}


def count_lines(n: int, q: int = 3) -> int:
    check_grid_args(n, q)
    total = 0
    for a, b in primitive_directions(n, q):
        _, lengths = _direction_starts(n, a, b)
        total += int(np.count_nonzero(lengths >= q))
    return total


def flat_to_points(ids, n: int) -> list[GridPoint]:
    return [GridPoint(int(p) % n, int(p) // n) for p in ids]


def enumerate_lines(n: int, q: int = 3) -> list[LineIncidence]:
    """Every maximal collinear set of at least ``q`` grid points, sorted by key."""
    out = []
    for rows in line_arrays(n, q).values():
        ii = (rows % n).astype("<u2")
        jj = (rows // n).astype("<u2")
        packed = np.stack([ii, jj], axis=-1)
        for r in range(rows.shape[0]):
            pts = tuple(GridPoint(int(i), int(j)) for i, j in packed[r])
            out.append(LineIncidence(pts, packed[r].tobytes()))
    out.sort(key=lambda ln: ln.canonical_key)
    return out


def enumerate_lines_pairwise(n: int, q: int = 3) -> list[LineIncidence]:
    """Oracle: close every point pair to its full line and dedup by key.

    Quadratic in the number of pairs times the grid size; keep ``n`` small.
    """
    check_grid_args(n, q)
    pts = grid_points(n)
    found: dict[bytes, LineIncidence] = {}
    for x in range(len(pts)):
        for y in range(x + 1, len(pts)):
            p, r = pts[x], pts[y]
            on = [s for s in pts if collinear(p, r, s)]
            if len(on) < q:
                continue
            line = LineIncidence.from_points(on)
            found.setdefault(line.canonical_key, line)
    return [found[k] for k in sorted(found)]
