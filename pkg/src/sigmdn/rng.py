"""Keyed, counter-based random streams.

Every stream is a Philox generator whose key is derived from a master seed
and a tuple of non-negative integers (domain tag, maturity index, draw index,
...).  Two calls with the same key always yield the same stream, independent
of the order or thread in which streams are created.
"""

from __future__ import annotations

import numpy as np

# Domain tags keep unrelated draws from ever sharing a key.
MATURITY = 1
SCENARIO = 2
PATHS = 3
EVAL_SCENARIO = 4
EVAL_PATHS = 5
SHUFFLE = 6
INIT = 7
VALIDATION_OFFSET = 1000


def stream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``(seed, *key)``."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError("seed and key components must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
