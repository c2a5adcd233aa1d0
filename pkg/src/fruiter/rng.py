"""SplitMix64: a small, fully specified 64-bit generator.

Chosen over :mod:`random` so that baseline outputs are reproducible from the
algorithm alone, on any platform or in any language. Reference outputs for
seed 1234567 are 6457827717110365317, 3203168211198807973, ...
"""

from __future__ import annotations

import hashlib
from typing import MutableSequence

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        self.state = seed

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), by rejection of the biased low range."""
        if n <= 0:
            raise ValueError("n must be positive")
        threshold = (1 << 64) % n
        while True:
            x = self.next_u64()
            if x >= threshold:
                return x % n

    def open_unit(self) -> float:
        """Uniform double in the open interval (0, 1).

        The top 52 bits select one of 2**52 cells and the draw is the cell's
        midpoint. Every midpoint is an exact double, so neither 0.0 nor 1.0
        can occur (with 53 bits the top midpoint would round up to 1.0).
        """
        return ((self.next_u64() >> 12) + 0.5) / 4503599627370496.0

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates, walking from the last position down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_seed(seed: int, *parts: str) -> int:
    """Mix a base seed with string labels into an independent 64-bit seed."""
    h = hashlib.sha256(seed.to_bytes(8, "big"))
    for p in parts:
        h.update(b"\x00")
        h.update(p.encode("utf-8"))
    return int.from_bytes(h.digest()[:8], "big")
