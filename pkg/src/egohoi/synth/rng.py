"""Keyed random streams.

Every draw in the generator comes from a Philox stream keyed by
``(master_seed, iteration, tag, *extra)``, so iterations can be produced in
any order, or in parallel, without changing a single value.
"""

from __future__ import annotations

import zlib

import numpy as np

_MASK64 = (1 << 64) - 1


def tag_key(tag: str) -> int:
    # zlib.crc32 is stable across processes, unlike hash().
    return zlib.crc32(tag.encode("utf-8"))


def stream(master_seed: int, iteration: int, tag: str, *extra: int) -> np.random.Generator:
    entropy = [master_seed & _MASK64, iteration, tag_key(tag), *extra]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
