"""Image and feature-map containers plus their binary file formats.

Images hold values in [0, 1] in planar layout, i.e. an array of shape
``(channels, height, width)``.  Feature maps hold ``n`` sites of ``m``
features each as a site-major ``(n, m)`` array.

Both containers are immutable: the wrapped arrays are marked read-only.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, FormatError

__all__ = [
    "Image",
    "FeatureMap",
    "image_read",
    "image_write",
    "fmap_read",
    "fmap_write",
    "FMAP_MAGIC",
    "FMAP_VERSION",
]

FMAP_MAGIC = b"FMAP"
FMAP_VERSION = 1
_FMAP_HEADER = struct.Struct("<4sIII")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, order="C", copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """Planar image with values in [0, 1]; ``data`` has shape (channels, height, width)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[None]
        if data.ndim != 3:
            raise DomainError(f"image data must be 2D or 3D, got shape {data.shape}")
        c, h, w = data.shape
        if c not in (1, 3):
            raise DomainError(f"channels must be 1 or 3, got {c}")
        if h < 1 or w < 1:
            raise DomainError(f"image must be at least 1x1, got {h}x{w}")
        if not np.all(np.isfinite(data)):
            raise DomainError("image data contains NaN or Inf")
        if data.min() < 0.0 or data.max() > 1.0:
            raise DomainError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def __eq__(self, other):
        if not isinstance(other, Image):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.data, other.data))


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """``sites`` feature vectors of length ``dims``; ``data`` has shape (sites, dims).

    The dtype of the input array is preserved when it is float32 or float64,
    so that maps read from FMAP files stay bit-exact.
    """

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.dtype not in (np.float32, np.float64):
            data = data.astype(np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise DomainError(f"feature map data must be 2D, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise DomainError(f"feature map needs sites >= 1 and dims >= 1, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise DomainError("feature map contains NaN or Inf")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def sites(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]

    def __eq__(self, other):
        if not isinstance(other, FeatureMap):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


# --------------------------------------------------------------------------
# PGM / PPM
# --------------------------------------------------------------------------

def _read_header_tokens(buf: bytes, count: int) -> tuple[list[bytes], int]:
    """Return ``count`` whitespace-separated header tokens and the payload offset."""
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos : pos + 1].isspace():
            pos += 1
        if pos < n and buf[pos : pos + 1] == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not buf[pos : pos + 1].isspace() and buf[pos : pos + 1] != b"#":
            pos += 1
        if start == pos:
            break
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates maxval from the raster
    if len(tokens) == count:
        if pos >= n or not buf[pos : pos + 1].isspace():
            raise FormatError("missing whitespace after maxval", field="maxval")
        pos += 1
    return tokens, pos


def image_read(path: str | os.PathLike) -> Image:
    """Read a binary 8-bit PGM (P5) or PPM (P6) file."""
    with open(path, "rb") as fh:
        buf = fh.read()

    tokens, offset = _read_header_tokens(buf, 4)
    names = ("magic", "width", "height", "maxval")
    if len(tokens) < 4:
        raise FormatError(f"incomplete header: missing {names[len(tokens)]}", field=names[len(tokens)])
    magic = tokens[0]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise FormatError(f"unsupported magic {magic!r}, expected P5 or P6", field="magic")

    values = {}
    for name, tok in zip(names[1:], tokens[1:]):
        try:
            values[name] = int(tok)
        except ValueError:
            raise FormatError(f"{name} is not an integer: {tok!r}", field=name) from None
    width, height, maxval = values["width"], values["height"], values["maxval"]
    if width < 1:
        raise FormatError(f"width must be positive, got {width}", field="width")
    if height < 1:
        raise FormatError(f"height must be positive, got {height}", field="height")
    if maxval != 255:
        raise FormatError(f"unsupported maxval {maxval}, only 255 is supported", field="maxval")

    expected = width * height * channels
    payload = buf[offset : offset + expected]
    if len(payload) < expected:
        raise FormatError(
            f"truncated payload: expected {expected} bytes, found {len(payload)}", field="payload"
        )
    raster = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, channels)
    return Image(raster.transpose(2, 0, 1).astype(np.float64) / 255.0)


def quantize(values: np.ndarray) -> np.ndarray:
    """Map [0, 1] values to bytes with round-half-up."""
    return np.floor(np.asarray(values, dtype=np.float64) * 255.0 + 0.5).astype(np.uint8)


def image_write(img: Image, path: str | os.PathLike) -> None:
    """Write ``img`` as P5 (one channel) or P6 (three channels)."""
    magic = b"P5" if img.channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (img.width, img.height)
    raster = quantize(img.data).transpose(1, 2, 0)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(raster.tobytes())


# --------------------------------------------------------------------------
# FMAP
# --------------------------------------------------------------------------

def fmap_write(fm: FeatureMap, path: str | os.PathLike) -> None:
    """Write ``fm`` in the FMAP format (little-endian, float32 payload)."""
    payload = np.ascontiguousarray(fm.data, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(_FMAP_HEADER.pack(FMAP_MAGIC, FMAP_VERSION, fm.sites, fm.dims))
        fh.write(payload.tobytes())


def fmap_read(path: str | os.PathLike) -> FeatureMap:
    """Read an FMAP file; the returned map holds float32 data."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < _FMAP_HEADER.size:
        raise FormatError(f"file too short for FMAP header ({len(buf)} bytes)", field="header")
    magic, version, sites, dims = _FMAP_HEADER.unpack_from(buf)
    if magic != FMAP_MAGIC:
        raise FormatError(f"bad magic {magic!r}", field="magic")
    if version != FMAP_VERSION:
        raise FormatError(f"unsupported version {version}", field="version")
    if sites < 1 or dims < 1:
        raise FormatError(f"sites and dims must be positive, got {sites}x{dims}", field="sites" if sites < 1 else "dims")
    expected = sites * dims * 4
    payload = buf[_FMAP_HEADER.size :]
    if len(payload) != expected:
        raise FormatError(
            f"length mismatch: header implies {expected} payload bytes, found {len(payload)}",
            field="payload",
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(sites, dims).astype(np.float32)
    return FeatureMap(data)
