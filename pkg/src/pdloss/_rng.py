"""Keyed counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from ``(seed, stream, index)``.  A row of a projection matrix or a
kernel of the feature bank therefore owns an independent stream, and the
values it receives do not depend on construction order or thread count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

# stream tags; the low 32 bits of the second key word hold the index
STREAM_ID = 1
STREAM_R2P = 2
STREAM_RPP = 3
STREAM_RSP = 4
STREAM_BANK = 0x100  # + layer number


def keyed_generator(seed: int, stream: int, index: int) -> np.random.Generator:
    if not 0 <= index < (1 << 32):
        raise ValueError(f"index out of range: {index}")
    if not 0 <= stream < (1 << 32):
        raise ValueError(f"stream out of range: {stream}")
    key = np.array([int(seed) & _MASK64, (stream << 32) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
