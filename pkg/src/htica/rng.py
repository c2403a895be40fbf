"""Seed derivation.

Every random stream in htica is a ``numpy.random.Generator`` built from a
``SeedSequence`` whose ``spawn_key`` names the consumer, e.g.
``substream(seed, TRIAL, 3, COMPONENT, 1)``.  Streams for different keys
are statistically independent and do not depend on the order in which they
are requested, so serial and parallel schedules draw identical numbers.
"""

from __future__ import annotations

import numpy as np

# spawn-key tags; keep them stable, changing one changes every experiment
MIXING = 0
COMPONENT = 1
TRIAL = 2
FASTICA = 3
DAMPING = 4
PIPELINE = 5
SYMMETRIZE = 6


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator for ``(seed, *keys)``."""
    if seed < 0:
        raise ValueError("seed must be non-negative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *keys: int) -> int:
    """Derive a 64-bit child seed, for handing to APIs that want an int."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def as_generator(rng) -> np.random.Generator:
    """Coerce ``None``, an int seed or a Generator into a Generator."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)
