"""Configuration checks, orbit expansion, bundled fixtures and small-n oracles.

Nothing here calls the search engine; the checks use exact integer geometry
only, so they can be used to audit solver output.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from math import gcd
from pathlib import Path

import numpy as np

from .geometry import GridPoint, collinear, in_grid
from .symmetry import fundamental_domain, rotate

CONFIG_FORMAT = "n3il-config/1"


class ExpansionError(ValueError):
    """Two representatives expand onto the same site."""

    def __init__(self, message: str, sites):
        super().__init__(message)
        self.sites = sorted(sites)


@dataclass(frozen=True)
class Configuration:
    n: int
    points: frozenset[GridPoint]

    def __post_init__(self):
        bad = [p for p in self.points if not in_grid(p, self.n)]
        if bad:
            raise ValueError(f"points outside the {self.n}x{self.n} grid: {sorted(bad)[:5]}")

    @classmethod
    def of(cls, n: int, points) -> "Configuration":
        pts = [GridPoint(int(i), int(j)) for i, j in points]
        if len(set(pts)) != len(pts):
            raise ValueError("configuration repeats a point")
        return cls(n, frozenset(pts))

    def sorted_points(self) -> list[GridPoint]:
        return sorted(self.points)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class OrbitRepresentatives:
    n: int
    reps: tuple[tuple[GridPoint, bool], ...]

    def validate(self, strict_count: bool = True) -> None:
        n = self.n
        domain = set(fundamental_domain(n))
        for p, diag in self.reps:
            if p not in domain:
                raise ValueError(f"representative {tuple(p)} is outside the fundamental domain")
            if diag and not (n % 2 == 1 and p.i == p.j):
                raise ValueError(f"diagonal flag on {tuple(p)} requires odd n and i == j")
            if n % 2 == 1 and p.i == p.j and not diag:
                raise ValueError(f"diagonal site {tuple(p)} must carry the diagonal flag for odd n")
        if not strict_count:
            return
        n_diag = sum(d for _, d in self.reps)
        want = n // 2 if n % 2 == 0 else (n + 1) // 2
        if len(self.reps) != want or (n % 2 == 1 and n_diag != 1):
            raise ValueError(
                f"expected {want} representatives"
                + (" with exactly one diagonal" if n % 2 else "")
                + f", got {len(self.reps)} ({n_diag} diagonal)"
            )


def expand(reps: OrbitRepresentatives, *, strict_count: bool = True) -> Configuration:
    reps.validate(strict_count)
    n = reps.n
    seen: dict[GridPoint, GridPoint] = {}
    clashes = set()
    for rep, diag in reps.reps:
        if diag:
            orbit = [rep, GridPoint(n - 1 - rep.i, n - 1 - rep.j)]
        else:
            orbit = [rep]
            for _ in range(3):
                orbit.append(rotate(orbit[-1], n))
        for p in orbit:
            if p in seen:
                clashes.add(p)
            seen[p] = rep
    if clashes:
        raise ExpansionError(f"orbits overlap at {sorted(clashes)}", clashes)
    return Configuration(n, frozenset(seen))


def restrict(c: Configuration) -> OrbitRepresentatives:
    """Occupied sites of the fundamental domain, with diagonal flags."""
    domain = fundamental_domain(c.n)
    odd = c.n % 2 == 1
    return OrbitRepresentatives(c.n, tuple((p, odd and p.i == p.j) for p in domain if p in c.points))


# -- verification -------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str = ""
    witness: tuple = field(default=())

    def __bool__(self) -> bool:
        return self.ok


def _direction(dx: int, dy: int) -> tuple[int, int]:
    g = gcd(dx, dy)
    dx, dy = dx // g, dy // g
    if dx < 0 or (dx == 0 and dy < 0):
        dx, dy = -dx, -dy
    return dx, dy


def find_collinear_triple(points, method: str = "slopes"):
    """First collinear triple among ``points`` (sorted), or ``None``."""
    pts = sorted(points)
    if method == "brute":
        for a, b, c in combinations(pts, 3):
            if collinear(a, b, c):
                return a, b, c
        return None
    for k, p in enumerate(pts):
        buckets: dict[tuple[int, int], GridPoint] = {}
        for q in pts[k + 1:]:
            d = _direction(q[0] - p[0], q[1] - p[1])
            if d in buckets:
                return p, buckets[d], q
            buckets[d] = q
    return None


def verify(
    c: Configuration,
    expect_count: int | None = None,
    *,
    two_per_line: bool = False,
    method: str = "slopes",
) -> Verdict:
    """Check size, no-three-in-line and (optionally) two per row and column."""
    if expect_count is not None and len(c) != expect_count:
        return Verdict(False, f"expected {expect_count} points, found {len(c)}")
    if two_per_line:
        for axis, name in ((1, "row"), (0, "column")):
            counts = np.bincount([p[axis] for p in c.points], minlength=c.n)
            bad = np.flatnonzero(counts != 2)
            if len(bad):
                k = int(bad[0])
                return Verdict(False, f"{name} {k} holds {int(counts[k])} points", (name, k))
    triple = find_collinear_triple(c.points, method)
    if triple is not None:
        return Verdict(False, "three collinear points", tuple(tuple(p) for p in triple))
    return Verdict(True)


# -- fixtures -----------------------------------------------------------------

_PAIR = re.compile(r"(\*\*)?\((\d+),\s*(\d+)\)(\*\*)?")


def parse_rep_line(text: str) -> list[tuple[GridPoint, bool]]:
    return [(GridPoint(int(i), int(j)), bool(b1)) for b1, i, j, _ in _PAIR.findall(text)]


def load_fixtures() -> dict[int, OrbitRepresentatives]:
    """Bundled orbit representatives for n in 47, 49, 51, 53..60."""
    text = resources.files("n3il").joinpath("data/reference_reps.txt").read_text()
    out = {}
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        n, body = line.split("\t", 1)
        out[int(n)] = OrbitRepresentatives(int(n), tuple(parse_rep_line(body)))
    return out


# -- file format --------------------------------------------------------------

def config_to_json(c: Configuration, reps: OrbitRepresentatives | None = None) -> str:
    doc: dict = {"format": CONFIG_FORMAT, "n": c.n, "points": [list(p) for p in c.sorted_points()]}
    if reps is not None:
        doc["reps"] = [[p.i, p.j, d] for p, d in reps.reps]
    return json.dumps(doc, indent=1) + "\n"


def reps_to_json(reps: OrbitRepresentatives) -> str:
    doc = {"format": CONFIG_FORMAT, "n": reps.n, "reps": [[p.i, p.j, d] for p, d in reps.reps]}
    return json.dumps(doc, indent=1) + "\n"


def read_config(path: str | Path) -> tuple[Configuration | None, OrbitRepresentatives | None]:
    """Load a configuration file; either part may be absent."""
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CONFIG_FORMAT or "n" not in doc:
        raise ValueError(f"{path}: not an {CONFIG_FORMAT} document")
    n = int(doc["n"])
    config = Configuration.of(n, doc["points"]) if "points" in doc else None
    reps = None
    if "reps" in doc:
        reps = OrbitRepresentatives(n, tuple((GridPoint(int(i), int(j)), bool(d)) for i, j, d in doc["reps"]))
    if config is None and reps is None:
        raise ValueError(f"{path}: neither points nor reps present")
    return config, reps


# -- oracles ------------------------------------------------------------------

D_GUARD = 6
TRIPLE_GUARD = 40


def brute_force_D(n: int) -> tuple[int, Configuration]:
    """Maximum no-three-in-line set by exhaustive search with <= 2 points per row."""
    if not 1 <= n <= D_GUARD:
        raise ValueError(f"brute_force_D is limited to 1 <= n <= {D_GUARD}")
    options = [c for c in combinations(range(n), 2)] + [(i,) for i in range(n)] + [()]
    best: list = [-1, []]

    def fits(pts, new):
        for a, b in combinations(pts, 2):
            for q in new:
                if collinear(a, b, q):
                    return False
        if len(new) == 2:
            return all(not collinear(p, new[0], new[1]) for p in pts)
        return True

    def go(j, pts):
        if len(pts) + 2 * (n - j) <= best[0]:
            return
        if j == n:
            best[0], best[1] = len(pts), list(pts)
            return
        for cols in options:
            new = [GridPoint(i, j) for i in cols]
            if fits(pts, new):
                go(j + 1, pts + new)

    go(0, [])
    return best[0], Configuration.of(n, best[1])


def count_collinear_triples(n: int) -> int:
    """Collinear 3-subsets of the grid, counted by direction buckets per anchor."""
    if not 1 <= n <= TRIPLE_GUARD:
        raise ValueError(f"count_collinear_triples is limited to n <= {TRIPLE_GUARD}")
    jj, ii = np.divmod(np.arange(n * n), n)
    total = 0
    for p in range(n * n):
        dx, dy = ii - ii[p], jj - jj[p]
        keep = np.arange(n * n) != p
        dx, dy = dx[keep], dy[keep]
        g = np.gcd(dx, dy)
        dx, dy = dx // g, dy // g
        flip = (dx < 0) | ((dx == 0) & (dy < 0))
        dx, dy = np.where(flip, -dx, dx), np.where(flip, -dy, dy)
        _, counts = np.unique(dx * (4 * n) + dy, return_counts=True)
        total += int((counts * (counts - 1) // 2).sum())
    # Each triple is seen once from each of its three points.
    return total // 3


def count_collinear_triples_brute(n: int) -> int:
    """Literal O(n^6) count; only for very small grids."""
    pts = [GridPoint(i, j) for j in range(n) for i in range(n)]
    return sum(1 for a, b, c in combinations(pts, 3) if collinear(a, b, c))


__all__ = [
    "Configuration",
    "ExpansionError",
    "OrbitRepresentatives",
    "Verdict",
    "brute_force_D",
    "config_to_json",
    "count_collinear_triples",
    "count_collinear_triples_brute",
    "expand",
    "find_collinear_triple",
    "load_fixtures",
    "read_config",
    "reps_to_json",
    "restrict",
    "verify",
]
