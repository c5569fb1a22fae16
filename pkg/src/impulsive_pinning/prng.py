"""SplitMix64 generator used wherever output must be portable.

Algorithm (all arithmetic modulo 2**64)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

Bounded integers in ``[0, m)`` use the multiply-high map
``(next() * m) >> 64``; uniform floats in ``[0, 1)`` use ``(next() >> 11) * 2**-53``.
"""

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX1) & MASK64
        z = ((z ^ (z >> 27)) * MIX2) & MASK64
        return z ^ (z >> 31)

    def below(self, m: int) -> int:
        if m <= 0:
            raise ValueError("bound must be positive")
        return (self.next_u64() * m) >> 64

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return low + (high - low) * ((self.next_u64() >> 11) * 2.0**-53)
