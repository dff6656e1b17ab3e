"""Counter-based random stream, scalar reference implementation.

The simulation kernels never consume a stateful generator. Every uniform
draw is a pure function of (seed, replicate, counter):

    key(seed, r)      = mix64(seed + (r + 1) * GOLDEN)
    value(seed, r, c) = mix64(key(seed, r) + (c + 1) * GOLDEN)
    uniform           = (value >> 11) * 2**-53          # in [0, 1)

mix64 is the SplitMix64 output finalizer (Stafford variant 13, as used by
Java's SplittableRandom), so this is exactly a SplitMix64 stream evaluated
at an arbitrary counter position. Work can be scheduled across any number
of threads without changing a single draw.

The numpy and Cython backends reimplement these functions bit-for-bit;
tests assert identity against this module.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
TWO_NEG53 = 1.0 / 9007199254740992.0


def mix64(z: int) -> int:
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX1) & MASK64
    z ^= z >> 27
    z = (z * _MIX2) & MASK64
    return z ^ (z >> 31)


def stream_value(seed: int, counter: int) -> int:
    """64-bit value at position `counter` of the stream keyed by `seed`."""
    return mix64((seed + (counter + 1) * GOLDEN) & MASK64)


def replicate_key(seed: int, replicate: int) -> int:
    """Sub-stream key for one replicate; feeds stream_value as its seed."""
    return stream_value(seed, replicate)


def unit_double(bits: int) -> float:
    """Map 64 random bits to [0, 1) using the top 53 bits."""
    return (bits >> 11) * TWO_NEG53


def uniform_at(seed: int, replicate: int, counter: int) -> float:
    """The uniform draw the kernels see for (seed, replicate, counter)."""
    return unit_double(stream_value(replicate_key(seed, replicate), counter))


def fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & MASK64
    return h


def derive_seed(master_seed: int, label: str) -> int:
    """Deterministic, platform-independent sub-seed for a named stream."""
    return mix64((master_seed & MASK64) ^ fnv1a64(label))
