"""Deterministic pseudo-random numbers for fixtures and sampling.

Everything random in this package flows from a single 64-bit seed through
splitmix64: the state advances by the odd constant 0x9E3779B97F4A7C15 and
each output is finalized with two xorshift-multiply rounds.  The algorithm
is a handful of integer operations, so streams reproduce bit-for-bit on
any platform or implementation.  Bounded draws use plain modulo reduction
``next_u64() % n``; the modulo bias is irrelevant for the tiny ranges used
here (n far below 2**32).
"""

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream seeded with a 64-bit integer."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Draw an integer in [0, n)."""
        if n <= 0:
            raise ValueError("below() needs a positive bound")
        return self.next_u64() % n

    def spawn(self) -> "SplitMix64":
        """Derive an independent child stream (one draw from this one)."""
        return SplitMix64(self.next_u64())
