"""Named random streams derived from a run seed.

Every consumer of randomness (parameter init per component, shuffling,
augmentation, dropout per head) draws from its own stream, so toggling one
consumer never shifts the numbers another one sees.
"""
import zlib

import numpy as np


def stream_key(name: str) -> int:
    return zlib.crc32(name.encode("utf-8"))


def rng_stream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for ``name`` under run seed ``seed``."""
    return np.random.default_rng([int(seed), stream_key(name)])
