"""Counter-based deterministic random streams.

Every random draw in a simulation comes from a named `Stream`. A stream is a
(seed, counter) pair; output k is a pure function of those two integers, so a
snapshot only needs to store them and any other implementation of the same
mixing function reproduces the draws exactly. The algorithm (a splitmix-style
64-bit finalizer over an additive counter sequence) and frozen test vectors
are documented in docs/rng.md.

Streams are split by name: the per-field streams and the migration stream are
all children of one root seed and never share counters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def mix64(z: int) -> int:
    """64-bit finalizer: xor-shift / multiply avalanche of a single word."""
    z &= MASK64
    z = (z ^ (z >> 30)) * _MIX1 & MASK64
    z = (z ^ (z >> 27)) * _MIX2 & MASK64
    return z ^ (z >> 31)


def fnv1a64(data: bytes) -> int:
    """FNV-1a hash, used to derive child stream seeds from labels."""
    h = _FNV_OFFSET
    for b in data:
        h = ((h ^ b) * _FNV_PRIME) & MASK64
    return h


def stream_value(seed: int, k: int) -> int:
    """The k-th raw 64-bit output of the stream with the given seed."""
    return mix64((seed + (k + 1) * _GOLDEN) & MASK64)


def _mix64_vec(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


@dataclass
class Stream:
    """A named, independently seeded draw sequence.

    `counter` is the index of the next output; drawing n values consumes
    counters [counter, counter + n). State restores exactly from the pair.
    """

    seed: int
    counter: int = 0
    name: str = field(default="", compare=False)

    @classmethod
    def from_root(cls, root_seed: int, label: str) -> "Stream":
        return cls(seed=mix64((root_seed & MASK64) ^ fnv1a64(label.encode())),
                   name=label)

    def child(self, label: str) -> "Stream":
        return Stream.from_root(self.seed, label)

    def raw(self, n: int) -> np.ndarray:
        """n raw uint64 words."""
        ks = np.arange(self.counter + 1, self.counter + n + 1, dtype=np.uint64)
        self.counter += n
        return _mix64_vec(np.uint64(self.seed) + ks * np.uint64(_GOLDEN))

    def uniform(self, n: int) -> np.ndarray:
        """n doubles in [0, 1): top 53 bits of each word over 2^53."""
        return (self.raw(n) >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)

    def one(self) -> float:
        return float(self.uniform(1)[0])

    def integer(self, bound: int) -> int:
        """One integer in [0, bound) by 53-bit scaling (bound << 2^53)."""
        return int(self.one() * bound)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates using one draw per swap, high index first."""
        for i in range(len(items) - 1, 0, -1):
            j = self.integer(i + 1)
            items[i], items[j] = items[j], items[i]

    def state(self) -> tuple[int, int]:
        return (self.seed, self.counter)
