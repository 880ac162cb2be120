"""Counter-based randomness shared by the compiled and Python kernels.

Tie-break draws must not depend on evaluation order, so each draw is a pure
function of ``(tie_seed, node, step)`` built from the SplitMix64 finaliser.
The compiled kernel reimplements the same bit operations.
"""
from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def tie_uniform(tie_seed: int, node: int, step: int) -> float:
    """Uniform double in [0, 1) for the tie at ``(node, step)``."""
    key = ((step & 0xFFFFFFFF) << 32) | (node & 0xFFFFFFFF)
    h = mix64((tie_seed & MASK64) ^ mix64((key + GOLDEN) & MASK64))
    return (h >> 11) * (1.0 / 9007199254740992.0)


def run_generator(master_seed: int, run_index: int) -> np.random.Generator:
    """Generator for run ``run_index``.

    Uses ``SeedSequence(master_seed, spawn_key=(run_index,))``, so adding runs
    never changes the streams of earlier ones.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return np.random.Generator(np.random.PCG64(ss))


def tie_seed_from(rng) -> int:
    """Accepts a Generator, an int, or None (seed 0)."""
    if rng is None:
        return 0
    if isinstance(rng, (int, np.integer)):
        return int(rng) & MASK64
    return int(rng.integers(0, 2**63, dtype=np.int64))
