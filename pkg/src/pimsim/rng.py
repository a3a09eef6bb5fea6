"""Deterministic 64-bit PRNG used for all reproducible fixtures.

The generator is splitmix64: the state advances by the golden-ratio
increment and each output is the finalizer (xor-shift-multiply) of the
new state.  Streams for structured objects (rows, records, edges) are
derived by folding the object's indices through the finalizer, so the
same (seed, indices) always yields the same stream regardless of
generation order.
"""

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: a 64-bit bijective scrambler."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def stream_seed(seed: int, *indices: int) -> int:
    """Derive a per-object stream seed from a run seed and index tuple."""
    state = mix64(seed)
    for idx in indices:
        state = mix64(state ^ mix64(idx ^ _GOLDEN))
    return state


class SplitMix64:
    """Sequential splitmix64 stream."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return mix64(self._state)

    def next_below(self, bound: int) -> int:
        """Uniform-ish draw in [0, bound) by modulo reduction.

        Modulo bias is below 2**-40 for any bound that fits desk-scale
        workloads, which is acceptable for fixture generation.
        """
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound

    def next_bits(self, n_bits: int) -> int:
        """Draw an n_bits-wide integer, 64 bits at a time (word i fills
        bits [64*i, 64*i + 64))."""
        if n_bits < 0:
            raise ValueError("n_bits must be non-negative")
        n_words = (n_bits + 63) // 64
        buf = bytearray()
        for _ in range(n_words):
            buf += self.next_u64().to_bytes(8, "little")
        return int.from_bytes(buf, "little") & ((1 << n_bits) - 1)
