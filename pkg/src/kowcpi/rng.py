"""Seeded, purpose-split random streams.

Every consumer asks for ``stream(seed, purpose)``; distinct purposes never
share draws, and the mapping is fixed across platforms (PCG64 + SeedSequence).
"""

import zlib

import numpy as np


def purpose_key(purpose: str) -> int:
    return zlib.crc32(purpose.encode("utf-8"))


def stream(seed: int, purpose: str) -> np.random.Generator:
    ss = np.random.SeedSequence([int(seed), purpose_key(purpose)])
    return np.random.Generator(np.random.PCG64(ss))
