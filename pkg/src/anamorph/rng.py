"""Seeded random streams.

Everything random draws from numpy's PCG64 generator.  Independent streams
for trials or sub-tasks come from ``substream(seed, label, index)``, which
seeds a ``SeedSequence`` with entropy ``seed`` and spawn key
``(crc32(label), index)``.  The mapping is stable across platforms and numpy
releases that keep ``SeedSequence`` unchanged.
"""
import os
import zlib

import numpy as np

SEED_ENV = "ANAMORPH_SEED"


def substream(seed: int, label: str, index: int = 0) -> np.random.Generator:
    key = (zlib.crc32(label.encode("utf-8")), int(index))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=int(seed), spawn_key=key)))


def resolve_seed(seed=None) -> int:
    """``seed`` if given, else ``$ANAMORPH_SEED``, else 0."""
    if seed is not None:
        return int(seed)
    env = os.environ.get(SEED_ENV)
    return int(env) if env not in (None, "") else 0
