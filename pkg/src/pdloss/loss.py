"""Projected distribution loss, the pointwise perceptual baseline, and pixel gradients.

The loss of an estimate ``u`` against a target ``v`` is

    mean_i |u_i - v_i|^q  +  lam * mean_j W_p(phi'_j(u), phi'_j(v))

where ``phi'_j`` collects the features of every spatial site projected on
direction ``w_j``.  Both sums are mean-normalised so that ``lam`` keeps its
meaning across image sizes and projection counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, UnsupportedConfigError
from .features import FeatureBankConfig, backprop, extract
from .projections import ProjectionConfig, ProjectionMatrix, _project, make_projections, projected_wasserstein
from .tensors import FeatureMap, Image

__all__ = [
    "LossConfig",
    "LossBreakdown",
    "pdl_loss",
    "pdl_loss_features",
    "percep_loss",
    "pdl_gradient",
    "descend",
]


@dataclass(frozen=True)
class LossConfig:
    lam: float = 0.01
    p: float = 1.0
    q: float = 1.0
    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    bank: FeatureBankConfig = field(default_factory=FeatureBankConfig)

    def __post_init__(self):
        if not self.lam >= 0:
            raise DomainError(f"lambda must be >= 0, got {self.lam}")
        if not (self.p >= 1 and self.q >= 1):
            raise DomainError(f"p and q must be >= 1, got p={self.p}, q={self.q}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "q", float(self.q))


@dataclass(frozen=True, eq=False)
class LossBreakdown:
    total: float
    pixel_term: float
    distribution_term: float
    per_projection: np.ndarray

    @classmethod
    def combine(cls, pixel_term: float, per_projection: np.ndarray, lam: float) -> "LossBreakdown":
        per = np.asarray(per_projection, dtype=np.float64)
        per.flags.writeable = False
        dist = float(np.mean(per))
        return cls(float(pixel_term) + lam * dist, float(pixel_term), dist, per)


def _check_pair(u: Image, v: Image) -> None:
    if u.shape != v.shape:
        raise DomainError(f"image shapes differ: {u.shape} vs {v.shape}")


def _pixel_term(u: Image, v: Image, q: float) -> float:
    d = np.abs(u.data - v.data)
    return float(np.mean(d if q == 1.0 else d**q))


def pdl_loss_features(fa: FeatureMap, fb: FeatureMap, pixel_term: float, cfg: LossConfig) -> LossBreakdown:
    """Loss on precomputed feature maps (e.g. loaded from FMAP files)."""
    if fa.data.shape != fb.data.shape:
        raise DomainError(f"feature map shapes differ: {fa.data.shape} vs {fb.data.shape}")
    W = make_projections(cfg.projection, fa.dims)
    return LossBreakdown.combine(pixel_term, projected_wasserstein(fa, fb, W, cfg.p), cfg.lam)


def pdl_loss(u: Image, v: Image, cfg: LossConfig | None = None) -> LossBreakdown:
    cfg = cfg or LossConfig()
    _check_pair(u, v)
    fa, _ = extract(u, cfg.bank)
    fb, _ = extract(v, cfg.bank)
    return pdl_loss_features(fa, fb, _pixel_term(u, v, cfg.q), cfg)


def percep_loss(u: Image, v: Image, cfg: LossConfig | None = None) -> LossBreakdown:
    """Pixel term plus ``lam`` times the mean of ``|phi(u) - phi(v)|^p`` over all entries.

    ``per_projection`` holds the per-channel means (no projection is applied).
    """
    cfg = cfg or LossConfig()
    _check_pair(u, v)
    fa, _ = extract(u, cfg.bank)
    fb, _ = extract(v, cfg.bank)
    return percep_loss_features(fa, fb, _pixel_term(u, v, cfg.q), cfg)


def percep_loss_features(fa: FeatureMap, fb: FeatureMap, pixel_term: float, cfg: LossConfig) -> LossBreakdown:
    if fa.data.shape != fb.data.shape:
        raise DomainError(f"feature map shapes differ: {fa.data.shape} vs {fb.data.shape}")
    d = np.abs(np.asarray(fa.data, dtype=np.float64) - np.asarray(fb.data, dtype=np.float64))
    if cfg.p != 1.0:
        d = d**cfg.p
    return LossBreakdown.combine(pixel_term, d.mean(axis=0), cfg.lam)


def _distribution_grad(pa: np.ndarray, pb: np.ndarray) -> np.ndarray:
    """Subgradient of mean_j W_1 w.r.t. the projected features of the first map.

    ``pa``, ``pb`` are (directions, sites).  Sorted ranks are matched; ties
    in the sort are broken by original index.
    """
    n_dir, n_sites = pa.shape
    order_a = np.argsort(pa, axis=1, kind="stable")
    sa = np.take_along_axis(pa, order_a, axis=1)
    sb = np.sort(pb, axis=1)
    g = np.zeros_like(pa)
    np.put_along_axis(g, order_a, np.sign(sa - sb) / (n_sites * n_dir), axis=1)
    return g


def _loss_and_grad(u: Image, v: Image, fb: FeatureMap, W: ProjectionMatrix, cfg: LossConfig):
    fa, tape = extract(u, cfg.bank)
    pa = _project(fa.data, W.rows)
    pb = _project(fb.data, W.rows)
    per = np.abs(np.sort(pa, axis=1) - np.sort(pb, axis=1)).mean(axis=1)
    diff = u.data - v.data
    breakdown = LossBreakdown.combine(float(np.mean(np.abs(diff))), per, cfg.lam)

    grad = np.sign(diff) / diff.size
    if cfg.lam != 0.0:
        g_feat = _distribution_grad(pa, pb).T @ W.rows  # (sites, dims)
        grad = grad + cfg.lam * backprop(tape, g_feat, cfg.bank)
    return breakdown, grad


def _check_grad_cfg(cfg: LossConfig) -> None:
    if cfg.p != 1.0 or cfg.q != 1.0:
        raise UnsupportedConfigError(f"gradient is implemented for p = q = 1 only, got p={cfg.p}, q={cfg.q}")


def pdl_gradient(u: Image, v: Image, cfg: LossConfig | None = None) -> np.ndarray:
    """Subgradient of :func:`pdl_loss` with respect to the pixels of ``u``.

    Returns an array shaped like ``u.data``.  Only ``p = q = 1`` is supported.
    """
    cfg = cfg or LossConfig()
    _check_grad_cfg(cfg)
    _check_pair(u, v)
    fb, _ = extract(v, cfg.bank)
    W = make_projections(cfg.projection, fb.dims)
    return _loss_and_grad(u, v, fb, W, cfg)[1]


def descend(
    u0: Image,
    v: Image,
    cfg: LossConfig | None = None,
    steps: int = 100,
    step_size: float = 0.05,
    resample: bool = False,
) -> tuple[Image, list[LossBreakdown]]:
    """Projected subgradient descent of ``u`` towards ``v`` on the PDL loss.

    Each step is ``u <- clip(u - step_size * grad, 0, 1)``.  The returned
    trace has ``steps + 1`` entries: the loss at ``u0`` and after every step.
    With ``resample`` the projection seed is advanced by one at every step.
    """
    cfg = cfg or LossConfig()
    _check_grad_cfg(cfg)
    _check_pair(u0, v)
    if int(steps) != steps or steps < 0:
        raise DomainError(f"steps must be a nonnegative integer, got {steps}")
    if not step_size > 0:
        raise DomainError(f"step_size must be > 0, got {step_size}")

    fb, _ = extract(v, cfg.bank)
    u = u0
    trace = []
    W = make_projections(cfg.projection, fb.dims)
    for step in range(int(steps) + 1):
        if resample and step > 0:
            pcfg = replace(cfg.projection, seed=(cfg.projection.seed + step) % 2**64)
            W = make_projections(pcfg, fb.dims)
        breakdown, grad = _loss_and_grad(u, v, fb, W, cfg)
        trace.append(breakdown)
        if step == steps:
            break
        u = Image(np.clip(u.data - step_size * grad, 0.0, 1.0))
    return u, trace
