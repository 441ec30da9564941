"""Seed derivation for reproducible per-trial random streams."""

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x):
    """SplitMix64 finalizer applied to a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(master_seed, *indices):
    """Mix a master seed with a sequence of indices into a new 64-bit seed."""
    s = splitmix64(int(master_seed) & MASK64)
    for i in indices:
        s = splitmix64(s ^ (int(i) & MASK64))
    return s


def make_rng(seed):
    """Counter-based (Philox) generator keyed by a 64-bit seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(key=int(seed) & MASK64))


def stream(master_seed, *indices):
    return make_rng(derive_seed(master_seed, *indices))
