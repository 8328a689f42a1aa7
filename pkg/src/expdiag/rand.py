"""Seed plumbing.

Philox + SeedSequence spawn keys give independent, reproducible substreams
that do not depend on execution order, which is what lets replication-level
work be farmed out while keeping byte-identical outputs.
"""

from __future__ import annotations

import zlib

import numpy as np


def _as_key(part) -> int:
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError(f"substream keys must be non-negative, got {part}")
        return int(part)
    return zlib.crc32(str(part).encode())


def substream(seed: int, *keys) -> np.random.Generator:
    """Independent generator derived from (seed, *keys).

    Keys may be ints or strings; strings are hashed.  The same (seed, keys)
    always yields the same stream regardless of what other streams were
    created before it.
    """
    sk = tuple(_as_key(k) for k in keys)
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=sk)
    return np.random.Generator(np.random.Philox(ss))


def as_generator(rng) -> np.random.Generator:
    """Coerce an int seed or Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        raise ValueError("rng is required; pass a Generator or an int seed")
    return substream(int(rng))
