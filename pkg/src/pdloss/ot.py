"""One-dimensional optimal transport and histogram divergences.

``wasserstein_1d`` is the workhorse: the p-Wasserstein distance between two
empirical distributions on the real line, computed from sorted samples.
``brute_force_ot`` enumerates permutation couplings of small point clouds in
any dimension and serves as an independent reference for it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, SizeError

__all__ = [
    "EmpiricalDist1D",
    "Histogram",
    "PointCloud",
    "wasserstein_1d",
    "brute_force_ot",
    "kld",
    "jsd",
    "emd_hist",
    "BRUTE_FORCE_MAX_N",
    "DEFAULT_EPS",
]

BRUTE_FORCE_MAX_N = 10
DEFAULT_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class EmpiricalDist1D:
    """Uniform-weight empirical distribution; ``samples`` are kept sorted."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64).ravel()
        if s.size == 0:
            raise DomainError("empirical distribution needs at least one sample")
        if not np.all(np.isfinite(s)):
            raise DomainError("samples must be finite")
        s = np.sort(s)
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    def __len__(self) -> int:
        return self.samples.size

    def quantile(self, s: np.ndarray) -> np.ndarray:
        """Generalized inverse CDF evaluated at levels ``s`` in [0, 1]."""
        n = self.samples.size
        idx = np.clip(np.ceil(np.asarray(s) * n).astype(np.int64) - 1, 0, n - 1)
        return self.samples[idx]


@dataclass(frozen=True, eq=False)
class Histogram:
    masses: np.ndarray
    bin_centers: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64).ravel()
        c = np.asarray(self.bin_centers, dtype=np.float64).ravel()
        if m.size == 0 or m.size != c.size:
            raise DomainError(f"masses ({m.size}) and bin_centers ({c.size}) must be nonempty and equal length")
        if not (np.all(np.isfinite(m)) and np.all(np.isfinite(c))):
            raise DomainError("histogram entries must be finite")
        if np.any(m < 0):
            raise DomainError("masses must be nonnegative")
        if abs(m.sum() - 1.0) > 1e-12:
            raise DomainError(f"masses must sum to 1, got {m.sum()!r}")
        if np.any(np.diff(c) <= 0):
            raise DomainError("bin_centers must be strictly increasing")
        m.flags.writeable = False
        c.flags.writeable = False
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "bin_centers", c)

    def __len__(self) -> int:
        return self.masses.size


@dataclass(frozen=True, eq=False)
class PointCloud:
    """``count`` points in R^dim, stored as a (count, dim) array."""

    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64)
        if p.ndim == 1:
            p = p[:, None]
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise DomainError(f"point cloud must be a nonempty (count, dim) array, got {p.shape}")
        if not np.all(np.isfinite(p)):
            raise DomainError("point coordinates must be finite")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "points", p)

    @property
    def count(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _as_dist(x) -> EmpiricalDist1D:
    return x if isinstance(x, EmpiricalDist1D) else EmpiricalDist1D(x)


def _check_p(p: float) -> float:
    p = float(p)
    if not p >= 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    return p


def _power_mean(diff: np.ndarray, weights: np.ndarray | None, p: float) -> float:
    d = np.abs(diff)
    if p == 1.0:
        return float(np.mean(d) if weights is None else np.dot(weights, d))
    if weights is None:
        return float(np.mean(d**p) ** (1.0 / p))
    return float(np.dot(weights, d**p) ** (1.0 / p))


def wasserstein_1d(a, b, p: float = 1.0) -> float:
    """p-Wasserstein distance between two empirical distributions on the line.

    Parameters
    ----------
    a, b : EmpiricalDist1D or array_like
        Samples; unsorted arrays are accepted and sorted here.
    p : float
        Ground-cost exponent, ``p >= 1``.

    Returns
    -------
    float
        ``W_p`` (the p-th root is taken).  For equal sizes this is
        ``(mean_k |a_(k) - b_(k)|^p)^(1/p)`` over the sorted samples.  For
        unequal sizes the quantile functions are step functions and the
        integral over [0, 1] is evaluated exactly on the merged breakpoint
        grid ``{i/n_a} U {j/n_b}``.
    """
    p = _check_p(p)
    a = _as_dist(a).samples
    b = _as_dist(b).samples
    na, nb = a.size, b.size
    if na == nb:
        return _power_mean(a - b, None, p)

    # breakpoints in units of 1/(na*nb): i*nb and j*na are exact integers
    grid = np.union1d(np.arange(na + 1, dtype=np.int64) * nb, np.arange(nb + 1, dtype=np.int64) * na)
    left = grid[:-1]
    widths = np.diff(grid).astype(np.float64) / float(na * nb)
    ia = left // nb
    ib = left // na
    return _power_mean(a[ia] - b[ib], widths, p)


@lru_cache(maxsize=None)
def _permutations(n: int) -> np.ndarray:
    perms = np.fromiter(
        itertools.chain.from_iterable(itertools.permutations(range(n))),
        dtype=np.int8,
        count=math.factorial(n) * n,
    )
    perms = perms.reshape(-1, n)
    perms.flags.writeable = False
    return perms


def brute_force_ot(A, B, p: float = 1.0) -> float:
    """Exact W_p between two uniform point clouds of equal size by enumeration.

    With uniform weights and equal counts the optimal coupling can be taken
    to be a permutation (Birkhoff-von Neumann), so minimising over all ``n!``
    matchings is exact.  Limited to ``n <= 10``.
    """
    p = _check_p(p)
    A = A if isinstance(A, PointCloud) else PointCloud(A)
    B = B if isinstance(B, PointCloud) else PointCloud(B)
    if A.count != B.count:
        raise DomainError(f"point clouds must have equal size, got {A.count} and {B.count}")
    if A.dim != B.dim:
        raise DomainError(f"dimension mismatch: {A.dim} vs {B.dim}")
    n = A.count
    if n > BRUTE_FORCE_MAX_N:
        raise SizeError(f"brute_force_ot enumerates n! couplings; n={n} exceeds {BRUTE_FORCE_MAX_N}")

    diff = A.points[:, None, :] - B.points[None, :, :]
    cost = np.sqrt(np.sum(diff * diff, axis=-1)) ** p
    perms = _permutations(n)
    totals = cost[np.arange(n), perms].sum(axis=1)
    best = float(totals.min()) / n
    return best if p == 1.0 else best ** (1.0 / p)


def _check_bins(h1: Histogram, h2: Histogram) -> None:
    if len(h1) != len(h2) or not np.array_equal(h1.bin_centers, h2.bin_centers):
        raise DomainError("histograms must share identical bin centers")


def _smooth(h: Histogram, eps: float) -> np.ndarray:
    return (h.masses + eps) / (1.0 + len(h) * eps)


def _kl(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.sum(p * np.log(p / q)))


def kld(h1: Histogram, h2: Histogram, eps: float = DEFAULT_EPS) -> float:
    """Kullback-Leibler divergence KL(h1 || h2) after additive ``eps`` smoothing."""
    _check_bins(h1, h2)
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    return _kl(_smooth(h1, eps), _smooth(h2, eps))


def jsd(h1: Histogram, h2: Histogram, eps: float = DEFAULT_EPS) -> float:
    """Jensen-Shannon divergence of the smoothed histograms (natural log, at most log 2)."""
    _check_bins(h1, h2)
    if not eps > 0:
        raise DomainError(f"eps must be > 0, got {eps}")
    p = _smooth(h1, eps)
    q = _smooth(h2, eps)
    m = 0.5 * (p + q)
    return 0.5 * _kl(p, m) + 0.5 * _kl(q, m)


def emd_hist(h1: Histogram, h2: Histogram) -> float:
    """Earth mover's distance (W_1) between histograms on their bin-center line."""
    _check_bins(h1, h2)
    c1 = np.cumsum(h1.masses)[:-1]
    c2 = np.cumsum(h2.masses)[:-1]
    return float(np.sum(np.abs(c1 - c2) * np.diff(h1.bin_centers)))


def shifted_histogram(base: Sequence[float], shift: int, bins: int, bin_width: float = 1.0) -> Histogram:
    """Place ``base`` masses starting at bin ``shift`` of a ``bins``-bin histogram."""
    base = np.asarray(base, dtype=np.float64)
    if shift < 0 or shift + base.size > bins:
        raise DomainError(f"shift {shift} does not fit a {base.size}-bin base into {bins} bins")
    masses = np.zeros(bins)
    masses[shift : shift + base.size] = base / base.sum()
    return Histogram(masses, np.arange(bins) * float(bin_width))
