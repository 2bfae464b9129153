"""Deterministic random streams.

Every stochastic operation takes an explicit integer seed.  Randomness that
is consumed per sample point comes from a counter-based generator keyed by
(seed, point index), so results do not depend on how work is scheduled
across workers.
"""

import numpy as np

_MASK64 = (1 << 64) - 1


def master_rng(seed: int) -> np.random.Generator:
    """Generator for draws made once, in a fixed order, before any fan-out."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def point_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sample point ``index`` under ``seed``.

    The 128-bit Philox key is (index << 64) | seed, so streams for distinct
    indices never overlap and do not depend on creation order.
    """
    if index < 0:
        raise ValueError("point index must be non-negative")
    key = ((index & _MASK64) << 64) | (seed & _MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def subseed(seed: int, label: str) -> int:
    """Derive a 64-bit stream seed for a named sub-task of an experiment."""
    h = np.uint64(seed & _MASK64)
    for ch in label.encode("utf-8"):
        h = np.uint64((int(h) ^ ch) * 0x100000001B3 & _MASK64)
    return int(h)
