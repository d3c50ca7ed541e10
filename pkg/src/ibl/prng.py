"""SplitMix64 pseudo-random generator.

Chosen because the algorithm fits in ten lines and is specified exactly by
its two constants, so any implementation in any language reproduces the
same probe streams from the same 64-bit seed.  Reference: Steele, Lea &
Flood, "Fast splittable pseudorandom number generators" (OOPSLA 2014).
"""

from __future__ import annotations

from fractions import Fraction

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform in [0, n) by rejection, so the stream is portable."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def between(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi]."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def fraction(self, num_range: tuple[int, int], den_range: tuple[int, int]) -> Fraction:
        """Random num/den with numerator and denominator drawn uniformly."""
        num = self.between(*num_range)
        den = self.between(*den_range)
        return Fraction(num, den)

    def sample_indices(self, bound: int, size: int) -> list[int]:
        """Sorted sample of distinct indices from [0, bound)."""
        if size > bound:
            raise ValueError("sample larger than range")
        picked: set[int] = set()
        while len(picked) < size:
            picked.add(self.below(bound))
        return sorted(picked)
