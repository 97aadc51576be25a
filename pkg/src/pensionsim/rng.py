"""Seeded random streams for reproducible runs.

Generator: xoshiro256** over four 64-bit words. ``new_rng(seed)`` fills
the words with the first four outputs of a SplitMix64 stream started at
``seed``. Streams are deterministic per seed within this package; nothing
is promised across other builds.

A stream is a ``uint64[5]`` array: words 0-3 hold the generator state,
word 4 counts draws in sample units:

* ``sample``, ``randbelow``, ``random``: +1 each
* ``shuffle`` of ``n`` items: +max(n - 1, 0), one per Fisher-Yates swap

The compiled kernels take that array directly, so the engine and the
Python-level helpers advance the same stream.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, TypeVar, Union

import numpy as np
from numba import njit

T = TypeVar("T")

MASK64 = (1 << 64) - 1

# Odd multipliers for derive_seed (golden-ratio and SplitMix64 constants).
SEED_C1 = 0x9E3779B97F4A7C15
SEED_C2 = 0xBF58476D1CE4E5B9

DIST_UNIFORM_INT = 0
DIST_CLAMPED_NORMAL = 1


def mix64(z: int) -> int:
    """SplitMix64 output finalizer."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def splitmix64(seed: int, n: int) -> list[int]:
    out = []
    state = seed & MASK64
    for _ in range(n):
        state = (state + SEED_C1) & MASK64
        out.append(mix64(state))
    return out


def _rotl64(x: int, k: int) -> int:
    x &= MASK64
    return ((x << k) | (x >> (64 - k))) & MASK64


def derive_seed(master: int, cell_index: int, rep_index: int) -> int:
    """Seed for replication ``rep_index`` of sweep cell ``cell_index``.

    ``mix64(master ^ (cell_index * SEED_C1) ^ rotl(rep_index * SEED_C2, 32))``,
    everything modulo 2**64.
    """
    if cell_index < 0 or rep_index < 0:
        raise ValueError("cell_index and rep_index must be non-negative")
    z = (master & MASK64) ^ ((cell_index * SEED_C1) & MASK64) ^ _rotl64(rep_index * SEED_C2, 32)
    return mix64(z)


# -- compiled kernels -------------------------------------------------------

@njit(cache=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True)
def next_u64(s):
    result = _rotl(s[1] * np.uint64(5), 7) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


@njit(cache=True)
def _unit(s):
    return float(next_u64(s) >> np.uint64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True)
def _below(s, n):
    # rejection keeps the result unbiased for any n
    un = np.uint64(n)
    threshold = (np.uint64(0) - un) % un
    r = next_u64(s)
    while r < threshold:
        r = next_u64(s)
    return np.int64(r % un)


@njit(cache=True)
def k_random(s):
    s[4] += np.uint64(1)
    return _unit(s)


@njit(cache=True)
def k_randbelow(s, n):
    s[4] += np.uint64(1)
    return _below(s, n)


@njit(cache=True)
def _round_half_away(x):
    if x >= 0.0:
        return math.floor(x + 0.5)
    return -math.floor(-x + 0.5)


@njit(cache=True)
def k_sample(s, p):
    """Draw from an encoded distribution ``p = [kind, lo, hi, mu, sigma, rounding]``."""
    s[4] += np.uint64(1)
    lo = p[1]
    hi = p[2]
    if p[0] == DIST_UNIFORM_INT:
        return lo + float(_below(s, np.int64(hi - lo) + 1))
    u1 = _unit(s)
    u2 = _unit(s)
    z = math.sqrt(-2.0 * math.log(1.0 - u1)) * math.cos(2.0 * math.pi * u2)
    x = p[3] + p[4] * z
    if p[5] != 0.0:
        x = _round_half_away(x)
    if x < lo:
        x = lo
    elif x > hi:
        x = hi
    return x


@njit(cache=True)
def k_shuffle(s, arr, n):
    """Fisher-Yates over ``arr[:n]`` in place."""
    if n > 1:
        s[4] += np.uint64(n - 1)
    for i in range(n - 1, 0, -1):
        j = _below(s, i + 1)
        tmp = arr[i]
        arr[i] = arr[j]
        arr[j] = tmp


# -- distributions ----------------------------------------------------------

@dataclass(frozen=True)
class UniformInt:
    lo: int
    hi: int

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"UniformInt: lo {self.lo} > hi {self.hi}")

    def encode(self) -> np.ndarray:
        return np.array([DIST_UNIFORM_INT, self.lo, self.hi, 0.0, 1.0, 1.0])

    @property
    def integral(self) -> bool:
        return True


@dataclass(frozen=True)
class ClampedNormal:
    mu: float
    sigma: float
    lo: float
    hi: float
    rounding: str = "none"  # "none" | "nearest-int"

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"ClampedNormal: lo {self.lo} > hi {self.hi}")
        if not self.sigma > 0:
            raise ValueError("ClampedNormal: sigma must be positive")
        if self.rounding not in ("none", "nearest-int"):
            raise ValueError(f"ClampedNormal: unknown rounding {self.rounding!r}")

    def encode(self) -> np.ndarray:
        return np.array([DIST_CLAMPED_NORMAL, self.lo, self.hi, self.mu, self.sigma,
                         1.0 if self.rounding == "nearest-int" else 0.0])

    @property
    def integral(self) -> bool:
        return self.rounding == "nearest-int"


DistributionSpec = Union[UniformInt, ClampedNormal]


class RngState:
    """Single-owner random stream; each replication gets its own."""

    __slots__ = ("seed", "s")

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.s = np.array(splitmix64(self.seed, 4) + [0], dtype=np.uint64)

    @property
    def draws(self) -> int:
        return int(self.s[4])

    def random(self) -> float:
        return k_random(self.s)

    def randbelow(self, n: int) -> int:
        if n < 1:
            raise ValueError("randbelow needs n >= 1")
        return int(k_randbelow(self.s, n))

    def sample(self, dist: DistributionSpec):
        x = k_sample(self.s, dist.encode())
        return int(x) if dist.integral else x

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates on a Python list."""
        n = len(items)
        if n < 2:
            return
        order = np.arange(n, dtype=np.int64)
        k_shuffle(self.s, order, n)
        items[:] = [items[i] for i in order]

    def state(self) -> tuple[int, ...]:
        return tuple(int(w) for w in self.s)


def new_rng(seed: int) -> RngState:
    return RngState(seed)


def sample(dist: DistributionSpec, rng: RngState):
    return rng.sample(dist)


def shuffle(items: Sequence[T], rng: RngState) -> list[T]:
    """Shuffled copy of ``items``."""
    out = list(items)
    rng.shuffle(out)
    return out
