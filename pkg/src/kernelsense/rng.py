"""Seed derivation for reproducible Monte Carlo trials.

Every trial owns its generator, seeded by ``base_seed ^ splitmix64(key)``,
so a trial's noise depends only on its key and never on which worker ran it
or in what order.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finaliser (Steele, Lea & Flood)."""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base_seed: int, trial: int, stream: int = 0) -> int:
    # stream occupies the top bits so trial counters never collide across streams
    if trial < 0 or stream < 0:
        raise ValueError("trial and stream must be non-negative")
    key = ((stream & 0xFFFF) << 48) | (trial & ((1 << 48) - 1))
    return (base_seed & MASK64) ^ splitmix64(key)


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))
