"""Canonical residue arithmetic and reproducible randomness.

Everything downstream (mask algebra, the enumeration oracles, the event
simulator) leans on two guarantees made here: residues are always stored as
the least non-negative representative, and random residues are exactly
uniform, with no modulo bias.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "Modulus",
    "ModulusMismatchError",
    "Residue",
    "SeededRng",
    "add",
    "sub",
    "sum_mod",
    "uniform_residue",
]

_U64 = 2**64


class ModulusMismatchError(ValueError):
    """Arithmetic attempted between residues with different moduli."""


@dataclass(frozen=True)
class Modulus:
    """A ring size for residue arithmetic. Must fit in an unsigned 64-bit word."""

    value: int

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError(f"modulus must be an int, got {type(self.value).__name__}")
        if not 1 < self.value < _U64:
            raise ValueError(f"modulus must satisfy 1 < p < 2**64, got {self.value}")

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Residue:
    """An element of Z_p held as its least non-negative representative."""

    value: int
    modulus: Modulus

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, int):
            raise TypeError(f"residue value must be an int, got {type(self.value).__name__}")
        if not 0 <= self.value < self.modulus.value:
            raise ValueError(
                f"residue {self.value} outside [0, {self.modulus.value}); "
                "use Residue.reduce for arbitrary integers"
            )

    @classmethod
    def reduce(cls, x: int, modulus: Modulus) -> "Residue":
        """Normalize an arbitrary integer (negatives included) into Z_p."""
        return cls(x % modulus.value, modulus)

    def _check(self, other: "Residue") -> None:
        if self.modulus != other.modulus:
            raise ModulusMismatchError(
                f"mixed moduli {self.modulus.value} and {other.modulus.value}"
            )

    def __add__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue((self.value + other.value) % self.modulus.value, self.modulus)

    def __sub__(self, other: "Residue") -> "Residue":
        self._check(other)
        return Residue((self.value - other.value) % self.modulus.value, self.modulus)

    def __neg__(self) -> "Residue":
        return Residue((-self.value) % self.modulus.value, self.modulus)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        return f"{self.value} mod {self.modulus.value}"


def add(x: Residue, y: Residue) -> Residue:
    return x + y


def sub(x: Residue, y: Residue) -> Residue:
    return x - y


def sum_mod(values: Sequence[Residue] | Iterable[Residue], modulus: Optional[Modulus] = None) -> Residue:
    """Sum residues sharing one modulus; the empty sum needs `modulus` spelled out."""
    total = 0
    m = modulus
    for v in values:
        if m is None:
            m = v.modulus
        elif v.modulus != m:
            raise ModulusMismatchError(f"mixed moduli {m.value} and {v.modulus.value}")
        total += v.value
    if m is None:
        raise ValueError("empty sum has no modulus; pass one explicitly")
    return Residue(total % m.value, m)


class SeededRng:
    """Deterministic random stream addressed by (seed, stream).

    The mapping is part of the external interface and must stay stable:
    64-bit words come from PCG64 keyed by SeedSequence(seed, spawn_key=stream),
    consumed via the bit generator's raw output. Residues are drawn by masking
    a word to the smallest power-of-two range covering p and rejecting
    out-of-range words, so every residue is exactly equally likely.
    """

    def __init__(self, seed: int, stream: Union[int, tuple] = 0):
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise TypeError("seed must be an int")
        if not 0 <= seed < _U64:
            raise ValueError(f"seed must fit in an unsigned 64-bit word, got {seed}")
        key = (stream,) if isinstance(stream, int) else tuple(stream)
        self.seed = seed
        self.stream = key if len(key) != 1 else key[0]
        self._raw = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)).random_raw

    def randint_below(self, n: int) -> int:
        """Uniform integer in [0, n) by masked rejection; n must fit in 64 bits."""
        if n <= 0 or n >= _U64:
            raise ValueError(f"range size must satisfy 0 < n < 2**64, got {n}")
        if n == 1:
            return 0
        mask = (1 << (n - 1).bit_length()) - 1
        while True:
            word = int(self._raw()) & mask
            if word < n:
                return word

    def randrange(self, lo: int, hi: int) -> int:
        """Uniform integer in the inclusive range [lo, hi]."""
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        return lo + self.randint_below(hi - lo + 1)

    def uniform_residue(self, modulus: Modulus) -> Residue:
        return Residue(self.randint_below(modulus.value), modulus)


def uniform_residue(rng: SeededRng, modulus: Modulus) -> Residue:
    """Draw one exactly uniform element of Z_p from the given stream."""
    return rng.uniform_residue(modulus)
