"""Binary fixed-point fractions in [0, 1) with a tracked error bound."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LIMB_BITS = 64
MAX_BITS = 960  # keeps 2**-B a normal double


@dataclass(frozen=True)
class FixedPointFraction:
    """The value ``mantissa * 2**-bits``, with ``|value - true| <= err_ulp * 2**-bits``.

    Addition is modulo 1, which is exact on the mantissa; the error bounds of
    the operands add up (plus one ulp of slack, kept for parity with the
    rounding model used for every other operation).
    """

    mantissa: int
    bits: int
    err_ulp: int = 0

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("bits must be positive")
        if not 0 <= self.mantissa < (1 << self.bits):
            raise ValueError("mantissa out of range for [0, 1)")
        if self.err_ulp < 0:
            raise ValueError("err_ulp must be nonnegative")

    @classmethod
    def zero(cls, bits):
        return cls(0, bits, 0)

    @classmethod
    def from_fraction(cls, num, den, bits, err_ulp=0):
        """Round ``{num/den}`` to ``bits`` binary digits (half up)."""
        num %= den
        mant = ((num << (bits + 1)) + den) // (2 * den)
        return cls(mant & ((1 << bits) - 1), bits, err_ulp + 1)

    def __float__(self):
        # int / int true division is correctly rounded
        return self.mantissa / (1 << self.bits)

    @property
    def error(self) -> float:
        """Absolute error bound as a float."""
        return math.ldexp(float(self.err_ulp), -self.bits)

    def __add__(self, other: FixedPointFraction) -> FixedPointFraction:
        if not isinstance(other, FixedPointFraction):
            return NotImplemented
        if other.bits != self.bits:
            raise ValueError("precision mismatch")
        mant = (self.mantissa + other.mantissa) & ((1 << self.bits) - 1)
        return FixedPointFraction(mant, self.bits, self.err_ulp + other.err_ulp + 1)

    def times(self, n: int) -> FixedPointFraction:
        """``{n * x}`` by one multiplication modulo 2**bits."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n == 0:
            return FixedPointFraction.zero(self.bits)
        mant = (self.mantissa * n) & ((1 << self.bits) - 1)
        return FixedPointFraction(mant, self.bits, n * (self.err_ulp + 1))

    def widen(self, bits: int) -> FixedPointFraction:
        """Exact re-expression at a larger precision."""
        if bits < self.bits:
            raise ValueError("can only widen")
        shift = bits - self.bits
        return FixedPointFraction(self.mantissa << shift, bits, self.err_ulp << shift)

    def distance_to_int(self) -> tuple[float, float]:
        """``(||x||, error)``, with ``||x||`` correctly rounded."""
        mod = 1 << self.bits
        d = min(self.mantissa, mod - self.mantissa)
        return d / mod, self.error

    def to_limbs(self) -> np.ndarray:
        return int_to_limbs(self.mantissa, limb_count(self.bits))


def limb_count(bits: int) -> int:
    return -(-bits // LIMB_BITS)


def int_to_limbs(value: int, count: int) -> np.ndarray:
    """Little-endian 64-bit limbs of a nonnegative integer."""
    raw = value.to_bytes(8 * count, "little")
    return np.frombuffer(raw, dtype="<u8").astype(np.uint64)


def limbs_to_int(limbs) -> int:
    return int.from_bytes(np.ascontiguousarray(limbs, dtype="<u8").tobytes(), "little")
