"""Deterministic per-document random streams.

Each (seed, stream id) pair yields an independent, platform-stable draw
sequence: the pair is hashed into a 64-bit key that seeds a stdlib
Mersenne generator. Per-chunk streams make pipeline output independent of
worker scheduling and allow resuming mid-corpus.
"""

from __future__ import annotations

import hashlib
import random


class Rng:
    """Seeded random source scoped to one stream (document/chunk)."""

    __slots__ = ("seed", "stream", "_rng")

    def __init__(self, seed: int, stream: str = ""):
        self.seed = seed
        self.stream = stream
        key = hashlib.blake2b(
            stream.encode("utf-8"),
            key=(seed & 0xFFFFFFFFFFFFFFFF).to_bytes(8, "little"),
            digest_size=8,
        ).digest()
        self._rng = random.Random(int.from_bytes(key, "little"))

    def random(self) -> float:
        """Uniform float in [0, 1)."""
        return self._rng.random()

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self._rng.randrange(n)
