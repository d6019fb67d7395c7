"""Deterministic seed derivation for parallel Monte Carlo.

Every stochastic trial draws from its own stream, seeded by a SplitMix-style
64-bit mix of (master seed, tag hash, trial index).  The mix is part of the
output contract: results are identical for any worker count or trial-block
partition, and independent implementations can reproduce them.

    seed_i = splitmix64(splitmix64(splitmix64(master_seed) ^ tag_hash(tag)) ^ i)

where tag_hash(tag) is the first 8 bytes (big-endian) of SHA-256 of the
UTF-8 tag string.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One SplitMix64 output step for the 64-bit state x."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def tag_hash(tag: str) -> int:
    return int.from_bytes(hashlib.sha256(tag.encode("utf-8")).digest()[:8], "big")


def derive_seed(master_seed: int, tag: str, index: int) -> int:
    """64-bit stream seed for trial `index` of the task named `tag`."""
    return splitmix64(splitmix64(splitmix64(master_seed & MASK64) ^ tag_hash(tag)) ^ (index & MASK64))


def rng_for(master_seed: int, tag: str, index: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, tag, index))
