"""Deterministic PRNG used everywhere randomness is observable.

Generation and detection must derive identical valid-region sets from the
same seed, in this implementation and in any port, so the generator and all
derived draws are pinned down to the bit:

* ``mix64``: the splitmix64 finalizer (avalanche) on 64-bit integers:
  ``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
  z *= 0x94D049BB133111EB; z ^= z >> 31`` (all arithmetic mod 2**64).
* ``splitmix64``: the full stream generator; the state advances by the
  golden-gamma constant ``0x9E3779B97F4A7C15`` and each output is the
  finalizer applied to the new state.  Seed 0 yields
  ``0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F, ...``
  (reference C implementation outputs).
* ``Xoshiro256StarStar``: xoshiro256** with its state initialized from four
  successive splitmix64 outputs of the seed.

Derived draws are defined on top of ``next_u64`` and are part of the
determinism contract:

* ``random()``: ``(next_u64() >> 11) * 2.0**-53`` in ``[0, 1)``.
* ``randbelow(n)``: rejection sampling with the smallest all-ones bit mask
  covering ``n - 1``; unbiased.
* ``shuffle(xs)``: Fisher-Yates from the last index down:
  ``j = randbelow(i + 1)`` then swap.
* ``gauss()``: Box-Muller on ``u1 = ((next_u64() >> 11) + 1) * 2.0**-53``
  (in ``(0, 1]``, so the log is finite) and ``u2 = random()``; the cosine
  branch is returned first and the sine branch on the following call.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit integer."""
    z = x & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, n: int) -> list[int]:
    """First ``n`` outputs of the splitmix64 stream for ``seed``."""
    state = seed & _MASK64
    out = []
    for _ in range(n):
        state = (state + _GOLDEN_GAMMA) & _MASK64
        out.append(mix64(state))
    return out


def derive_seed(base: int, *parts: int) -> int:
    """Fold sub-stream tags into a base seed: ``h = mix64(h ^ mix64(part))``.

    Single-knob reproducibility: one master seed, distinct tags per consumer
    (see ``SeedRole`` in :mod:`sentmark.cli`).
    """
    h = base & _MASK64
    for part in parts:
        h = mix64(h ^ mix64(part & _MASK64))
    return h


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded via splitmix64; the package-wide random stream."""

    __slots__ = ("_s", "_gauss_spare")

    def __init__(self, seed: int):
        self._s = splitmix64(seed, 4)
        if not any(self._s):  # all-zero state is invalid for xoshiro
            self._s[0] = 1
        self._gauss_spare: float | None = None

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float64 in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection."""
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        if n == 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            r = self.next_u64() & mask
            if r < n:
                return r

    def shuffle(self, xs: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.randbelow(i + 1)
            xs[i], xs[j] = xs[j], xs[i]

    def gauss(self) -> float:
        """Standard normal draw via Box-Muller (pair cached)."""
        if self._gauss_spare is not None:
            z = self._gauss_spare
            self._gauss_spare = None
            return z
        u1 = ((self.next_u64() >> 11) + 1) * 2.0**-53
        u2 = self.random()
        r = math.sqrt(-2.0 * math.log(u1))
        self._gauss_spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)
