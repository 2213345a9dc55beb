"""Counter-based random streams keyed by integer tuples.

A stream is a Philox generator whose key is derived from ``(seed, *key)``,
so the draws for, say, replication 17 do not depend on which worker ran it
or on how many replications ran before it.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the key path ``(seed, *key)``."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and key components must be non-negative integers")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
