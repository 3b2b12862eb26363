"""Projection matrices for feature distributions and the sliced Wasserstein distance.

Four schemes are supported:

``id``
    identity rows, i.e. compare the per-channel marginals;
``r2p``
    random normal combination of two distinct, randomly chosen channels;
``rpp``
    a basis vector plus a small Gaussian perturbation;
``rsp``
    uniform directions on the unit sphere (Monte Carlo sliced Wasserstein).

All rows are unit norm. Row ``j`` is drawn from its own stream keyed by
``(seed, scheme, j)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import _rng
from ._parallel import map_rows
from .errors import ConfigError, DomainError
from .ot import _check_p
from .tensors import FeatureMap

__all__ = [
    "Scheme",
    "ProjectionConfig",
    "ProjectionMatrix",
    "make_projections",
    "project_features",
    "projected_wasserstein",
    "sliced_wasserstein",
]


class Scheme(str, enum.Enum):
    ID = "id"
    R2P = "r2p"
    RPP = "rpp"
    RSP = "rsp"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(s.value for s in cls)
            raise ConfigError(f"unknown projection scheme {value!r} (expected one of {names})") from None


_STREAMS = {
    Scheme.ID: _rng.STREAM_ID,
    Scheme.R2P: _rng.STREAM_R2P,
    Scheme.RPP: _rng.STREAM_RPP,
    Scheme.RSP: _rng.STREAM_RSP,
}


@dataclass(frozen=True)
class ProjectionConfig:
    scheme: Scheme = Scheme.ID
    factor: int = 1
    seed: int = 0
    perturbation: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))
        if int(self.factor) != self.factor or self.factor < 1:
            raise ConfigError(f"factor must be a positive integer, got {self.factor}")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if not self.perturbation > 0:
            raise ConfigError(f"perturbation must be > 0, got {self.perturbation}")
        object.__setattr__(self, "factor", int(self.factor))
        object.__setattr__(self, "seed", int(self.seed))
        if self.scheme is Scheme.ID and self.factor != 1:
            raise ConfigError(f"Id projection requires factor 1, got {self.factor}")


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """``rows`` has shape (m', m); every row has unit Euclidean norm."""

    rows: np.ndarray
    scheme: Scheme
    seed: int

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64, order="C")
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DomainError(f"projection rows must form a nonempty 2D array, got {rows.shape}")
        norms = np.linalg.norm(rows, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise DomainError("projection rows must have unit norm")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "scheme", Scheme.parse(self.scheme))

    @property
    def count(self) -> int:
        return self.rows.shape[0]

    @property
    def dims(self) -> int:
        return self.rows.shape[1]

    @classmethod
    def from_directions(cls, directions, scheme=Scheme.RSP, seed: int = 0) -> "ProjectionMatrix":
        """Normalise arbitrary nonzero direction vectors into a matrix."""
        d = np.asarray(directions, dtype=np.float64)
        if d.ndim == 1:
            d = d[None]
        norms = np.linalg.norm(d, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise DomainError("directions must be nonzero")
        return cls(d / norms, scheme, seed)


def _r2p_row(gen: np.random.Generator, m: int) -> np.ndarray:
    i = int(gen.integers(m))
    k = int(gen.integers(m - 1))
    k = k + 1 if k >= i else k
    coef = gen.standard_normal(2)
    while np.any(coef == 0.0):
        coef = gen.standard_normal(2)
    row = np.zeros(m)
    row[i], row[k] = coef
    return row


def _sphere_row(gen: np.random.Generator, m: int) -> np.ndarray:
    row = gen.standard_normal(m)
    while not np.any(row):
        row = gen.standard_normal(m)
    return row


def make_projections(cfg: ProjectionConfig, m: int) -> ProjectionMatrix:
    """Build the ``factor * m`` projection directions for ``m``-dimensional features."""
    if int(m) != m or m < 1:
        raise DomainError(f"feature dimension must be a positive integer, got {m}")
    m = int(m)
    count = cfg.factor * m
    if cfg.scheme is Scheme.ID:
        return ProjectionMatrix(np.eye(m), cfg.scheme, cfg.seed)
    if cfg.scheme is Scheme.R2P and m < 2:
        raise ConfigError("r2p needs at least two feature channels")

    stream = _STREAMS[cfg.scheme]

    def build(start: int, stop: int) -> np.ndarray:
        out = np.empty((stop - start, m))
        for j in range(start, stop):
            gen = _rng.keyed_generator(cfg.seed, stream, j)
            if cfg.scheme is Scheme.R2P:
                row = _r2p_row(gen, m)
            elif cfg.scheme is Scheme.RPP:
                row = cfg.perturbation * gen.standard_normal(m)
                row[j % m] += 1.0
                if not np.any(row):  # pragma: no cover - probability zero
                    row[j % m] = 1.0
            else:
                row = _sphere_row(gen, m)
            out[j - start] = row / np.linalg.norm(row)
        return out

    return ProjectionMatrix(map_rows(build, count, min_chunk=256), cfg.scheme, cfg.seed)


def _project(x: np.ndarray, rows: np.ndarray) -> np.ndarray:
    """(directions, sites) array of dot products, accumulated over channels in index order.

    Avoids BLAS so every entry is computed by the same sequence of roundings,
    whatever its position; permuting sites permutes the output bit-exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    out = rows[:, 0, None] * x[None, :, 0]
    for k in range(1, rows.shape[1]):
        out += rows[:, k, None] * x[None, :, k]
    return out


def project_features(fm: FeatureMap, W: ProjectionMatrix) -> FeatureMap:
    """Entry ``(i, j)`` of the result is ``<w_j, phi_i>``."""
    if fm.dims != W.dims:
        raise DomainError(f"feature dims {fm.dims} do not match projection dims {W.dims}")
    return FeatureMap(_project(fm.data, W.rows).T)


def projected_wasserstein(fa: FeatureMap, fb: FeatureMap, W: ProjectionMatrix, p: float = 1.0) -> np.ndarray:
    """Per-direction ``W_p`` between the projected site distributions of ``fa`` and ``fb``."""
    p = _check_p(p)
    if fa.dims != fb.dims:
        raise DomainError(f"feature dims differ: {fa.dims} vs {fb.dims}")
    if fa.sites != fb.sites:
        raise DomainError(f"site counts differ: {fa.sites} vs {fb.sites}")
    if fa.dims != W.dims:
        raise DomainError(f"feature dims {fa.dims} do not match projection dims {W.dims}")
    # one contiguous row per direction: the per-row sort and mean do not
    # depend on how rows are split across threads
    pa = _project(fa.data, W.rows)
    pb = _project(fb.data, W.rows)

    def block(start: int, stop: int) -> np.ndarray:
        d = np.abs(np.sort(pa[start:stop], axis=1) - np.sort(pb[start:stop], axis=1))
        if p == 1.0:
            return d.mean(axis=1)
        return (d**p).mean(axis=1) ** (1.0 / p)

    return map_rows(block, W.count)


def sliced_wasserstein(fa: FeatureMap, fb: FeatureMap, cfg: ProjectionConfig, p: float = 1.0) -> float:
    """Mean over projection directions of the 1D ``W_p`` between projected features."""
    if fa.dims != fb.dims:
        raise DomainError(f"feature dims differ: {fa.dims} vs {fb.dims}")
    W = make_projections(cfg, fa.dims)
    return float(np.mean(projected_wasserstein(fa, fb, W, p)))
