"""Projected distribution loss (PDL) for comparing deep-feature distributions."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, FormatError, PDLError, SizeError, UnsupportedConfigError
from .features import BankTape, FeatureBankConfig, LayerSpec, backprop, extract, linearize
from .loss import (
    LossBreakdown,
    LossConfig,
    descend,
    pdl_gradient,
    pdl_loss,
    pdl_loss_features,
    percep_loss,
    percep_loss_features,
)
from .metrics import MetricReport, PerfectMatchError, psnr, score
from .ot import (
    EmpiricalDist1D,
    Histogram,
    PointCloud,
    brute_force_ot,
    emd_hist,
    jsd,
    kld,
    shifted_histogram,
    wasserstein_1d,
)
from .projections import (
    ProjectionConfig,
    ProjectionMatrix,
    Scheme,
    make_projections,
    project_features,
    projected_wasserstein,
    sliced_wasserstein,
)
from .tensors import FeatureMap, Image, fmap_read, fmap_write, image_read, image_write
