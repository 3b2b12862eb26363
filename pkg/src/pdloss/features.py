"""Seeded convolutional feature bank with exact reverse-mode gradients.

A stack of bias-free 3x3 convolutions ("same" zero padding, stride 1 or 2),
each followed by a rectifier.  Weights are He-scaled normals drawn from a
stream keyed by ``(seed, layer, kernel)``, so the bank is fully determined
by its config.  It stands in for a pretrained VGG trunk: any extractor
producing an (n, m) feature map fits the loss, and externally computed
features can be loaded from FMAP files instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import _rng
from .errors import ConfigError, DomainError
from .tensors import FeatureMap, Image

__all__ = [
    "LayerSpec",
    "FeatureBankConfig",
    "BankTape",
    "extract",
    "backprop",
    "linearize",
    "bank_weights",
    "KERNEL_SIZE",
]

KERNEL_SIZE = 3


@dataclass(frozen=True)
class LayerSpec:
    kernels: int
    stride: int = 1

    def __post_init__(self):
        if int(self.kernels) != self.kernels or self.kernels < 1:
            raise ConfigError(f"kernel count must be a positive integer, got {self.kernels}")
        if self.stride not in (1, 2):
            raise ConfigError(f"stride must be 1 or 2, got {self.stride}")


def _default_layers() -> tuple[LayerSpec, ...]:
    return (LayerSpec(8, 1), LayerSpec(16, 2), LayerSpec(32, 2))


@dataclass(frozen=True)
class FeatureBankConfig:
    layers: tuple[LayerSpec, ...] = field(default_factory=_default_layers)
    seed: int = 0

    def __post_init__(self):
        layers = tuple(l if isinstance(l, LayerSpec) else LayerSpec(*l) for l in self.layers)
        if not layers:
            raise ConfigError("feature bank needs at least one layer")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def min_size(self) -> int:
        """Smallest accepted image side: twice the total downsampling factor."""
        return 2 * math.prod(l.stride for l in self.layers)

    @property
    def dims(self) -> int:
        return self.layers[-1].kernels

    def output_hw(self, height: int, width: int) -> tuple[int, int]:
        for layer in self.layers:
            height = -(-height // layer.stride)
            width = -(-width // layer.stride)
        return height, width


@dataclass(frozen=True, eq=False)
class BankTape:
    """Per-layer inputs and pre-activations recorded by :func:`extract`."""

    inputs: tuple[np.ndarray, ...]
    preacts: tuple[np.ndarray, ...]
    image_shape: tuple[int, int, int]
    config: FeatureBankConfig

    @property
    def output_shape(self) -> tuple[int, int, int]:
        return self.preacts[-1].shape


@lru_cache(maxsize=32)
def bank_weights(cfg: FeatureBankConfig, in_channels: int) -> tuple[np.ndarray, ...]:
    """Weights of every layer, each of shape (kernels, in_channels, 3, 3)."""
    weights = []
    cin = in_channels
    for li, layer in enumerate(cfg.layers):
        scale = math.sqrt(2.0 / (cin * KERNEL_SIZE * KERNEL_SIZE))
        w = np.empty((layer.kernels, cin, KERNEL_SIZE, KERNEL_SIZE))
        for k in range(layer.kernels):
            gen = _rng.keyed_generator(cfg.seed, _rng.STREAM_BANK + li, k)
            w[k] = gen.standard_normal((cin, KERNEL_SIZE, KERNEL_SIZE)) * scale
        w.flags.writeable = False
        weights.append(w)
        cin = layer.kernels
    return tuple(weights)


def _conv(x: np.ndarray, w: np.ndarray, stride: int) -> np.ndarray:
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    win = sliding_window_view(xp, (KERNEL_SIZE, KERNEL_SIZE), axis=(1, 2))[:, ::stride, ::stride]
    return np.tensordot(w, win, axes=([1, 2, 3], [0, 3, 4]))


def _conv_transpose(g: np.ndarray, w: np.ndarray, stride: int, in_shape: tuple[int, int, int]) -> np.ndarray:
    c, h, wd = in_shape
    _, ho, wo = g.shape
    cols = np.tensordot(w, g, axes=([0], [0]))  # (C, 3, 3, Ho, Wo)
    gp = np.zeros((c, h + 2, wd + 2))
    for di in range(KERNEL_SIZE):
        for dj in range(KERNEL_SIZE):
            gp[:, di : di + stride * (ho - 1) + 1 : stride, dj : dj + stride * (wo - 1) + 1 : stride] += cols[
                :, di, dj
            ]
    return gp[:, 1:-1, 1:-1]


def _check_image(img: Image, cfg: FeatureBankConfig) -> None:
    if img.height < cfg.min_size or img.width < cfg.min_size:
        raise DomainError(
            f"image {img.height}x{img.width} too small for the stride schedule (need >= {cfg.min_size}x{cfg.min_size})"
        )


def extract(img: Image, cfg: FeatureBankConfig | None = None) -> tuple[FeatureMap, BankTape]:
    """Run the bank on ``img``; returns the final activations as (sites, kernels)."""
    cfg = cfg or FeatureBankConfig()
    _check_image(img, cfg)
    weights = bank_weights(cfg, img.channels)
    x = np.asarray(img.data)
    inputs, preacts = [], []
    for layer, w in zip(cfg.layers, weights):
        z = _conv(x, w, layer.stride)
        inputs.append(x)
        preacts.append(z)
        x = np.maximum(z, 0.0)
    features = FeatureMap(x.reshape(x.shape[0], -1).T)
    return features, BankTape(tuple(inputs), tuple(preacts), img.shape, cfg)


def _features_to_volume(grad, tape: BankTape) -> np.ndarray:
    g = np.asarray(grad.data if isinstance(grad, FeatureMap) else grad, dtype=np.float64)
    k, ho, wo = tape.output_shape
    if g.shape != (ho * wo, k):
        raise DomainError(f"feature gradient shape {g.shape} does not match extractor output {(ho * wo, k)}")
    return np.ascontiguousarray(g.T).reshape(k, ho, wo)


def backprop(tape: BankTape, grad_features, cfg: FeatureBankConfig | None = None) -> np.ndarray:
    """Pull a (sites, kernels) feature gradient back to an image-shaped gradient.

    The rectifier's subgradient at exactly zero is taken as 0.
    """
    cfg = cfg or tape.config
    if cfg != tape.config:
        raise DomainError("config does not match the one used to record the tape")
    g = _features_to_volume(grad_features, tape)
    weights = bank_weights(cfg, tape.image_shape[0])
    for layer, w, x, z in reversed(list(zip(cfg.layers, weights, tape.inputs, tape.preacts))):
        g = _conv_transpose(g * (z > 0), w, layer.stride, x.shape)
    return g


def linearize(tape: BankTape, direction: np.ndarray) -> np.ndarray:
    """Forward-mode derivative of :func:`extract` at the taped point, as (sites, kernels)."""
    cfg = tape.config
    d = np.asarray(direction, dtype=np.float64).reshape(tape.image_shape)
    weights = bank_weights(cfg, tape.image_shape[0])
    for layer, w, z in zip(cfg.layers, weights, tape.preacts):
        d = _conv(d, w, layer.stride) * (z > 0)
    return d.reshape(d.shape[0], -1).T
