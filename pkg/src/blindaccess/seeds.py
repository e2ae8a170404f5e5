"""Deterministic RNG stream derivation.

Every random draw in the library comes from a stream derived from a master
seed and an integer key path, so transmitter and receiver simulations (and
repeated runs) agree without serializing any state. Streams are PCG64
generators keyed by ``SeedSequence(master_seed, spawn_key=key)``.

Domain tags keep unrelated draws on disjoint key paths.
"""

from __future__ import annotations

import numpy as np

# Domain tags (first element of every spawn key).
CODEBOOK = 101
CHANNEL = 102
MESSAGE = 103
NOISE = 104
PERTURBATION = 105
ACTIVITY = 106
TRIAL = 107


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Return the PCG64 generator for the stream ``(master_seed, key)``."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(seq)


def derive_seed(master_seed: int, *key: int) -> int:
    """Fold the stream ``(master_seed, key)`` into a 64-bit integer seed.

    Used to hand independent per-trial master seeds to code that itself
    derives sub-streams.
    """
    seq = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    lo, hi = seq.generate_state(2, dtype=np.uint32)
    return int(hi) << 32 | int(lo)
