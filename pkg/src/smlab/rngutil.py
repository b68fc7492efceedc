"""Seeded generators and the documented per-run seed splitting.

Every stochastic component owns a ``random.Random`` seeded explicitly; there
is no module-level generator.  Benchmark runs derive independent per-trial
seeds from one base seed with ``mix_seed`` so that re-running a config file
reproduces every trial without coordination.
"""

from __future__ import annotations

import random

RNG_ALGORITHM = "mt19937"

_MASK64 = (1 << 64) - 1


def make_rng(seed: int) -> random.Random:
    """A fresh Mersenne-Twister generator for the given 64-bit seed."""
    return random.Random(seed & _MASK64)


def _splitmix64(x: int) -> int:
    """Finalizer of the splitmix64 generator (Steele et al.)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_seed(base: int, index: int) -> int:
    """Per-run seed ``base ⊕ splitmix64(index + 1)``, then finalized again.

    Two finalizer passes keep nearby (base, index) pairs statistically
    unrelated while staying trivially reproducible.
    """
    return _splitmix64((base & _MASK64) ^ _splitmix64(index + 1))
