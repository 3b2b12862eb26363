"""Deterministic test images: a smooth scene and a 3x3 box blur."""

from __future__ import annotations

import numpy as np

from .tensors import Image

__all__ = ["demo_scene", "box_blur", "random_image"]


def demo_scene(size: int = 32) -> Image:
    """Smooth shading, a low-frequency wave and a soft-edged disk."""
    yy, xx = (np.mgrid[0:size, 0:size] + 0.5) / size
    r = np.hypot(xx - 0.6, yy - 0.45)
    disk = 1.0 / (1.0 + np.exp((r - 0.25) * size / 1.5))
    scene = 0.3 + 0.15 * np.sin(3 * np.pi * xx) * np.cos(2 * np.pi * yy) + 0.35 * disk + 0.1 * yy
    return Image(np.clip(scene, 0.0, 1.0)[None])


def box_blur(img: Image) -> Image:
    """3x3 mean filter with edge replication."""
    x = img.data
    p = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="edge")
    h, w = x.shape[1:]
    out = np.zeros_like(x)
    for i in range(3):
        for j in range(3):
            out += p[:, i : i + h, j : j + w]
    return Image(np.clip(out / 9.0, 0.0, 1.0))


def random_image(rng: np.random.Generator, size: int, channels: int = 1, low: float = 0.0, high: float = 1.0) -> Image:
    return Image(rng.uniform(low, high, size=(channels, size, size)))
