"""Pinned, platform-independent random streams.

Generator: xoshiro256** (Blackman & Vigna), a 64-bit xorshift/linear
shift-register family member, seeded by expanding a 64-bit seed with
splitmix64. Everything is integer arithmetic on Python ints masked to 64 bits,
so the stream is bit-identical on every platform and numpy version.

Poisson variates use inversion below ``INVERSION_MAX`` (exactly one uniform
per draw, including lam = 0), Hormann's PTRS transformed rejection up to
``PTRS_MAX``, and a rounded normal above that, where lgamma can no longer
resolve unit steps in k.
"""
from __future__ import annotations

import math

GENERATOR_NAME = "xoshiro256**"
_MASK = (1 << 64) - 1
INVERSION_MAX = 30.0
PTRS_MAX = 1e10


def _splitmix64(x: int):
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return x, z ^ (z >> 31)


def check_seed(seed) -> int:
    if int(seed) != seed or not 0 <= seed <= _MASK:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return int(seed)


class Xoshiro256:
    __slots__ = ("s0", "s1", "s2", "s3", "_spare")

    def __init__(self, seed: int = 0):
        x = check_seed(seed)
        words = []
        for _ in range(4):
            x, z = _splitmix64(x)
            words.append(z)
        self.s0, self.s1, self.s2, self.s3 = words
        self._spare = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        x = (s1 * 5) & _MASK
        result = ((((x << 7) | (x >> 57)) & _MASK) * 9) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self.s0, self.s1, self.s2, self.s3 = s0, s1, s2, s3
        return result

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def normal(self) -> float:
        """Standard normal by the Marsaglia polar method."""
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        while True:
            u = 2.0 * self.random() - 1.0
            v = 2.0 * self.random() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        f = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * f
        return u * f

    def poisson(self, lam: float) -> int:
        if not lam >= 0:
            raise ValueError(f"Poisson mean must be nonnegative, got {lam}")
        # lam == 0 still consumes one uniform, keeping common-random-number
        # streams aligned between traces that differ only in intensity
        if lam < INVERSION_MAX:
            return self._poisson_inversion(lam)
        if lam < PTRS_MAX:
            return self._poisson_ptrs(lam)
        return max(0, math.floor(lam + math.sqrt(lam) * self.normal() + 0.5))

    def _poisson_inversion(self, lam: float) -> int:
        u = self.random()
        p = math.exp(-lam)
        cdf = p
        k = 0
        while u > cdf:
            k += 1
            p *= lam / k
            if p == 0.0:  # cdf rounding left u unreachable
                break
            cdf += p
        return k

    def _poisson_ptrs(self, lam: float) -> int:
        slam = math.sqrt(lam)
        loglam = math.log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2)
        while True:
            u = self.random() - 0.5
            v = self.random()
            us = 0.5 - abs(u)
            k = math.floor((2 * a / us + b) * u + lam + 0.43)
            if us >= 0.07 and v <= vr:
                return k
            if k < 0 or (us < 0.013 and v > us):
                continue
            if (math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)) <= (
                -lam + k * loglam - math.lgamma(k + 1)
            ):
                return k


def make_rng(seed: int, generator: str = GENERATOR_NAME) -> Xoshiro256:
    if generator != GENERATOR_NAME:
        raise ValueError(f"unsupported generator {generator!r}; only {GENERATOR_NAME}")
    return Xoshiro256(seed)


def derive_seed(base_seed: int, index: int) -> int:
    """Per-stream seed ``base_seed + index`` (wrapping at 2**64)."""
    return (check_seed(base_seed) + index) & _MASK
