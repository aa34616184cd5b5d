"""Deterministic, cross-language-replayable random streams.

The generator is xoshiro256** seeded through splitmix64, fixed here so
that experiment outputs are byte-stable across platforms and easy to
reproduce outside Python.  All arithmetic is modulo 2^64.

splitmix64 (stepping a counter x):
    x += 0x9E3779B97F4A7C15
    z = x
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output z ^ (z >> 31)

xoshiro256** (state s0..s3, all updates mod 2^64):
    result = rotl64(s1 * 5, 7) * 9
    t  = s1 << 17
    s2 ^= s0;  s3 ^= s1;  s1 ^= s2;  s0 ^= s3
    s2 ^= t
    s3  = rotl64(s3, 45)

A stream is opened per (seed, stream) pair: the splitmix64 counter
starts at (seed + stream * 0x9E3779B97F4A7C15) mod 2^64 and its first
four outputs become s0..s3.  Uniform doubles take the top 53 bits,
uniform = (next >> 11) * 2^-53 in [0, 1); normals come from the
Box-Muller transform (using 1 - uniform inside the logarithm, second
value cached).
"""

from __future__ import annotations

import math

__all__ = ["splitmix64", "Xoshiro256StarStar"]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK


def splitmix64(x: int) -> tuple:
    """One splitmix64 step: returns (new_counter, output)."""
    x = (x + _GOLDEN) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** with splitmix64 seeding and Box-Muller normals."""

    def __init__(self, seed: int, stream: int = 0):
        x = (int(seed) + int(stream) * _GOLDEN) & _MASK
        state = []
        for _ in range(4):
            x, z = splitmix64(x)
            state.append(z)
        if not any(state):  # pragma: no cover - unreachable with splitmix64
            state[0] = _GOLDEN
        self._s = state
        self._cached_normal = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK, 7) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def uniform(self) -> float:
        """A double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def uniform_in(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def normal(self) -> float:
        if self._cached_normal is not None:
            out, self._cached_normal = self._cached_normal, None
            return out
        u1 = 1.0 - self.uniform()  # in (0, 1]: the log is finite
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._cached_normal = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def complex_normal(self) -> complex:
        re = self.normal()
        im = self.normal()
        return complex(re, im)
