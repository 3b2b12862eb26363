"""PSNR and the aggregated ranking score."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError
from .loss import LossBreakdown
from .tensors import Image

__all__ = ["MetricReport", "PerfectMatchError", "psnr", "score"]


class PerfectMatchError(DomainError):
    """PSNR is undefined (infinite) for identical images."""


@dataclass(frozen=True)
class MetricReport:
    psnr: float
    msssim: Optional[float] = None
    lpips: Optional[float] = None
    pdl: Optional[LossBreakdown] = None
    swd: Optional[float] = None

    def __post_init__(self):
        for name in ("msssim", "lpips", "swd"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
        if self.msssim is not None and not 0.0 <= self.msssim <= 1.0:
            raise DomainError(f"msssim must lie in [0, 1], got {self.msssim}")
        if self.lpips is not None and self.lpips < 0:
            raise DomainError(f"lpips must be nonnegative, got {self.lpips}")

    def score(self, psnr_max: float, msssim_max: float, lpips_min: float) -> float:
        if self.msssim is None or self.lpips is None:
            raise DomainError("score needs msssim and lpips values")
        return score(self.psnr, self.msssim, self.lpips, psnr_max, msssim_max, lpips_min)


def psnr(u: Image, v: Image) -> float:
    """Peak signal-to-noise ratio in dB with peak value 1, over all channels jointly."""
    if u.shape != v.shape:
        raise DomainError(f"image shapes differ: {u.shape} vs {v.shape}")
    mse = float(np.mean((u.data - v.data) ** 2))
    if mse == 0.0:
        raise PerfectMatchError("images are identical; PSNR is infinite")
    return 10.0 * math.log10(1.0 / mse)


def score(
    psnr: float,
    msssim: float,
    lpips: float,
    psnr_max: float,
    msssim_max: float,
    lpips_min: float,
) -> float:
    """(psnr / psnr_max) * (msssim / msssim_max) * (lpips_min / lpips).

    Equals 1 when every metric sits at its best value across the compared
    configurations.
    """
    values = dict(psnr=psnr, msssim=msssim, lpips=lpips, psnr_max=psnr_max, msssim_max=msssim_max, lpips_min=lpips_min)
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be a finite positive number, got {value}")
    return (psnr / psnr_max) * (msssim / msssim_max) * (lpips_min / lpips)
