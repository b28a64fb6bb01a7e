"""Collinear-triple counts, the random-set heuristic, and runtime-distribution fits.

Exact quantities (``t_n``, ``q_n``) are kept as Python integers and
fractions; only the final logarithms are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from typing import Callable

import numpy as np

LAMBDA_C = math.pi / math.sqrt(3.0)
REFERENCE_FIT_M = 384


class FitError(ValueError):
    """The shifted-exponential fit is degenerate."""


# -- collinear triples ------------------------------------------------------

def _totients(m: int) -> list[int]:
    phi = list(range(m + 1))
    for p in range(2, m + 1):
        if phi[p] == p:
            for k in range(p, m + 1, p):
                phi[k] -= phi[k] // p
    return phi


def _gcd_weighted_sum(n: int) -> int:
    """sum_{a,b=1}^{n-1} (n-a)(n-b) gcd(a,b), via gcd(a,b) = sum_{d | a,b} phi(d)."""
    phi = _totients(n - 1)
    total = 0
    for d in range(1, n):
        s = sum(n - a for a in range(d, n, d))
        total += phi[d] * s * s
    return total


def triple_count_formula(n: int) -> int:
    """Number of collinear 3-subsets of the n x n grid (exact)."""
    if n < 1:
        raise ValueError("n must be positive")
    return 2 * _gcd_weighted_sum(n) - n * n * (n * n - 1) // 6


def triple_count_double_sum(n: int) -> int:
    """The same count evaluated as the literal double sum over gcds."""
    s = sum((n - a) * (n - b) * math.gcd(a, b) for a in range(1, n) for b in range(1, n))
    return 2 * s - n * n * (n * n - 1) // 6


def collinear_probability(n: int) -> Fraction:
    """q_n: chance that a uniformly random 3-subset of the grid is collinear."""
    return Fraction(triple_count_formula(n), math.comb(n * n, 3))


def log_binomial(N: int, k: int) -> float:
    return math.lgamma(N + 1) - math.lgamma(k + 1) - math.lgamma(N - k + 1)


def heuristic_count_log(n: int, k: int) -> float:
    """log of binom(n^2, k) * (1 - q_n)^binom(k, 3)."""
    N = n * n
    if not 0 <= k <= N:
        raise ValueError(f"k must lie in [0, n^2] = [0, {N}], got {k}")
    log_sets = log_binomial(N, k)
    triples = math.comb(k, 3)
    if triples == 0:
        return log_sets
    q = collinear_probability(n)
    return log_sets + triples * math.log1p(-float(q))


@dataclass(frozen=True)
class HeuristicParams:
    n: int
    k: int
    t_n: int
    q_n: Fraction
    logC: float

    @classmethod
    def compute(cls, n: int, k: int | None = None) -> "HeuristicParams":
        k = 2 * n if k is None else k
        return cls(n, k, triple_count_formula(n), collinear_probability(n), heuristic_count_log(n, k))


def leading_coefficient(lam: float) -> float:
    """Coefficient of n log n in log C(n, lam*n); it changes sign at LAMBDA_C."""
    return lam * (math.pi**2 - 3 * lam * lam) / math.pi**2


def crossing_n(n_lo: int = 2, n_hi: int = 2000) -> int:
    """Smallest n in [n_lo, n_hi] with log C(n, 2n) < 0, assuming a single crossing."""
    if heuristic_count_log(n_hi, 2 * n_hi) >= 0:
        raise ValueError(f"no crossing below n={n_hi}")
    lo, hi = n_lo, n_hi
    while lo < hi:
        mid = (lo + hi) // 2
        if heuristic_count_log(mid, 2 * mid) < 0:
            hi = mid
        else:
            lo = mid + 1
    return lo


# -- runtime distributions --------------------------------------------------

def transform_values(F, M: int):
    """1 - (1 - F)^M, pointwise on numbers or arrays."""
    if M < 1:
        raise ValueError("M must be >= 1")
    F = np.clip(np.asarray(F, dtype=float), 0.0, 1.0)
    out = F if M == 1 else 1.0 - (1.0 - F) ** M
    return out if out.ndim else float(out)


def cdf_transform(F: Callable[[float], float], M: int) -> Callable[[float], float]:
    """CDF of the minimum of M independent draws from F."""
    if M < 1:
        raise ValueError("M must be >= 1")
    if M == 1:
        return F

    def F_M(t):
        return transform_values(F(t), M)

    return F_M


@dataclass(frozen=True)
class ShiftedExpFit:
    t0: float
    t1: float
    M: int
    fit_window: tuple[float, float]
    points: int = 0

    def __post_init__(self):
        if self.t1 <= 0:
            raise FitError(f"non-positive delay scale t1={self.t1}")

    def cdf(self, t):
        """Model CDF 1 - exp(-M (t - t0) / t1) for t > t0, else 0."""
        t = np.asarray(t, dtype=float)
        out = np.where(t > self.t0, -np.expm1(-self.M * (t - self.t0) / self.t1), 0.0)
        return out if out.ndim else float(out)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return self.t0 + rng.exponential(self.t1 / self.M, size)


def fit_shifted_exponential(
    t,
    F_M,
    M: int,
    fit_window: tuple[float, float] | None = None,
    p_max: float = 0.98,
) -> ShiftedExpFit:
    """Least-squares line through (t, -log(1 - F_M)) with slope a and intercept b.

    Points with ``F_M == 0`` or ``F_M >= 1`` never enter the fit.  Without an
    explicit ``fit_window`` the points with ``F_M <= p_max`` are used.
    """
    t = np.asarray(t, dtype=float)
    F = np.asarray(F_M, dtype=float)
    if t.shape != F.shape:
        raise ValueError("t and F_M must have the same shape")
    keep = (F > 0) & (F < 1)
    if fit_window is None:
        keep &= F <= p_max
    else:
        keep &= (t >= fit_window[0]) & (t <= fit_window[1])
    if keep.sum() < 2:
        raise FitError(f"need at least 2 usable points, have {int(keep.sum())}")
    x, y = t[keep], -np.log1p(-F[keep])
    if np.ptp(x) == 0:
        raise FitError("all usable points share one time value")
    a, b = np.polyfit(x, y, 1)
    if a <= 0:
        raise FitError(f"non-positive slope {a:.4g}")
    window = fit_window if fit_window is not None else (float(x.min()), float(x.max()))
    return ShiftedExpFit(float(-b / a), float(M / a), M, window, int(keep.sum()))


def fit_statistics(fit: ShiftedExpFit, p: float = 0.5) -> tuple[float, float]:
    """Mean and p-quantile of the fitted shifted exponential."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    scale = fit.t1 / fit.M
    return fit.t0 + scale, fit.t0 + scale * math.log(1.0 / (1.0 - p))


def fit_from_cdf(F, M: int, p_max: float = 0.98) -> ShiftedExpFit:
    """Fit to the M-fold transform of an empirical single-run CDF at its jump times."""
    t = np.unique(np.asarray(F.times, dtype=float))
    return fit_shifted_exponential(t, transform_values(F(t), M), M, p_max=p_max)


@dataclass(frozen=True)
class ReferenceFit:
    n: int
    t0: float
    t1: float
    mean: float


def load_reference_fits() -> list[ReferenceFit]:
    """Reference fit parameters for M = 384 runs, as bundled with the package."""
    text = resources.files("n3il").joinpath("data/reference_fits.txt").read_text()
    rows = []
    for line in text.splitlines():
        if line.strip() and not line.startswith("#"):
            n, t0, t1, mean = line.split()
            rows.append(ReferenceFit(int(n), float(t0), float(t1), float(mean)))
    return rows
