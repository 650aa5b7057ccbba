"""SplitMix64 mixing and a seedable xoshiro256** generator.

Everything random in a simulation run flows through :class:`DeterministicRng`
so that a run is a pure function of its 64-bit seed.
"""

from __future__ import annotations

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

_INV_2_53 = 1.0 / (1 << 53)


def splitmix64(x: int) -> int:
    """One SplitMix64 step: advance ``x`` by the golden gamma and mix."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def fold64(words) -> int:
    """Fold 64-bit words into one digest with ``h = splitmix64(h ^ w)``."""
    h = 0
    for w in words:
        h = splitmix64(h ^ (w & MASK64))
    return h


def derive_seed(seed: int, purpose: int) -> int:
    """Independent sub-stream seed for ``purpose`` under a scenario ``seed``."""
    return splitmix64((seed & MASK64) ^ splitmix64(purpose & MASK64))


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class DeterministicRng:
    """xoshiro256** seeded by SplitMix64 expansion of a 64-bit seed."""

    __slots__ = ("seed", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int) -> None:
        self.seed = seed & MASK64
        state = []
        x = self.seed
        for _ in range(4):
            # splitmix64() adds the gamma itself; track the raw counter here
            state.append(splitmix64(x))
            x = (x + GOLDEN_GAMMA) & MASK64
        self._s0, self._s1, self._s2, self._s3 = state

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * _INV_2_53

    def random_open_closed(self) -> float:
        """Uniform double in (0, 1]."""
        return ((self.next_u64() >> 11) + 1) * _INV_2_53

    def uniform(self, a: float, b: float) -> float:
        return a + (b - a) * self.random()

    def state(self) -> tuple[int, int, int, int]:
        return (self._s0, self._s1, self._s2, self._s3)
