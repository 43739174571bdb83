"""Seed handling: every stochastic entry point accepts an int, None, or a
SeedSequence, and splits per-trial streams by spawning."""

import numpy as np


def seed_sequence(rng_seed) -> np.random.SeedSequence:
    """Normalize any accepted seed form to a SeedSequence."""
    if isinstance(rng_seed, np.random.SeedSequence):
        return rng_seed
    return np.random.SeedSequence(rng_seed)
