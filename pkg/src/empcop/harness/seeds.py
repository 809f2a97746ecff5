"""Seed derivation for replicates.

Every random stream in an experiment is ``default_rng([master, tag, n, index, ...])``
with ``tag`` a stable 32-bit hash of the stream name, so any single
replicate can be regenerated in isolation.
"""

from __future__ import annotations

import zlib

import numpy as np


def stream_tag(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def seed_sequence(master: int, name: str, n: int, *index: int) -> list:
    return [int(master), stream_tag(name), int(n), *[int(i) for i in index]]


def replicate_rng(master: int, name: str, n: int, *index: int) -> np.random.Generator:
    """Stream for replicate ``index`` of stream ``name`` at sample size ``n``."""
    return np.random.default_rng(seed_sequence(master, name, n, *index))
