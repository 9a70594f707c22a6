"""Deterministic random streams.

Every stochastic operation in the package draws from a Philox 4x64
counter-based generator keyed by an explicit 64-bit seed. Identical seeds
reproduce identical draws bit-for-bit on a given installation; independent
substreams are derived by jumping the counter, never by reseeding ad hoc.
"""

import numpy as np

MAX_SEED = 2**64 - 1


def check_seed(seed) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ValueError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return seed


def prng_stream(seed) -> np.random.Generator:
    """Return the deterministic generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=check_seed(seed)))


def substream(seed, index: int) -> np.random.Generator:
    """Independent stream number `index` under the same seed.

    Uses Philox counter jumps, so substreams never overlap and the mapping
    (seed, index) -> stream is fixed.
    """
    if index < 0:
        raise ValueError("substream index must be non-negative")
    return np.random.Generator(np.random.Philox(key=check_seed(seed)).jumped(index))
