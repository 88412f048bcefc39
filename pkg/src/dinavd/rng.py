"""Deterministic bit-exact random generator for catalog instances.

The generator is xorshift64* (Marsaglia xorshift with a multiplicative
output scramble).  It is specified exactly in ``docs/catalog_generators.txt``
so that an implementation in any language reproduces the same instance data
from the same 64-bit seed.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D
_SEED_ESCAPE = 0x9E3779B97F4A7C15  # used when seed maps to the forbidden zero state


class XorShift64Star:
    """xorshift64* stream.

    State update: ``s ^= s >> 12; s ^= s << 25; s ^= s >> 27`` (64-bit),
    output ``(s * 0x2545F4914F6CDD1D) mod 2**64``.  A zero seed is replaced
    by ``0x9E3779B97F4A7C15`` because zero is a fixed point of the update.
    """

    def __init__(self, seed: int):
        s = int(seed) & _MASK64
        self._state = s if s != 0 else _SEED_ESCAPE

    def next_u64(self) -> int:
        s = self._state
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self._state = s
        return (s * _MULT) & _MASK64

    def uniform(self) -> float:
        """Uniform double in [0, 1): top 53 bits of the output word."""
        return (self.next_u64() >> 11) * 2.0**-53

    def sym_uniform(self) -> float:
        """Uniform double in [-1, 1)."""
        return 2.0 * self.uniform() - 1.0

    def index(self, n: int) -> int:
        """Integer in [0, n) by modulo reduction (documented bias is fine at catalog sizes)."""
        return self.next_u64() % n

    def fill_sym(self, shape) -> np.ndarray:
        """Array of sym_uniform draws, C order (last axis fastest)."""
        out = np.empty(int(np.prod(shape)), dtype=np.float64)
        for i in range(out.size):
            out[i] = self.sym_uniform()
        return out.reshape(shape)

    def distinct_indices(self, k: int, n: int) -> list[int]:
        """k distinct integers in [0, n), drawn in order with rejection of repeats."""
        seen: list[int] = []
        while len(seen) < k:
            j = self.index(n)
            if j not in seen:
                seen.append(j)
        return seen
