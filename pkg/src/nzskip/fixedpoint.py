"""Two's-complement fixed-point scalars with exact widening multiply.

Everything downstream (the skip filter, the reference model, the lane
simulator) works on the raw integers defined here.  All operations are pure;
values are immutable and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class FormatMismatchError(ValueError):
    """Operands of a binary op carry different fixed-point formats."""


class AccumulatorOverflowError(OverflowError):
    """A wide accumulator exceeded its declared bit width."""


@dataclass(frozen=True)
class FixedFormat:
    """Qm.f layout: ``total_bits`` including sign, ``frac_bits`` fractional."""

    total_bits: int = 16
    frac_bits: int = 8

    def __post_init__(self):
        if not 2 <= self.total_bits <= 32:
            raise ValueError(f"total_bits must be in [2, 32], got {self.total_bits}")
        if not 0 <= self.frac_bits < self.total_bits:
            raise ValueError(
                f"frac_bits must be in [0, {self.total_bits - 1}], got {self.frac_bits}"
            )

    @property
    def raw_min(self) -> int:
        return -(1 << (self.total_bits - 1))

    @property
    def raw_max(self) -> int:
        return (1 << (self.total_bits - 1)) - 1

    @property
    def scale(self) -> int:
        """Raw units per 1.0."""
        return 1 << self.frac_bits


@dataclass(frozen=True)
class FixedScalar:
    raw: int
    format: FixedFormat

    def __post_init__(self):
        if not self.format.raw_min <= self.raw <= self.format.raw_max:
            raise ValueError(
                f"raw {self.raw} outside [{self.format.raw_min}, {self.format.raw_max}]"
            )

    def to_float(self) -> float:
        return self.raw / self.format.scale

    def magnitude(self) -> int:
        """Saturating absolute value, always fits in total_bits-1 unsigned bits.

        abs(raw_min) is clamped to raw_max so downstream leading-zero counts
        stay within an N-bit unsigned word.
        """
        return min(abs(self.raw), self.format.raw_max)


def quantize(x: float, fmt: FixedFormat) -> FixedScalar:
    """Round ``x`` half-to-even onto ``fmt``, saturating out-of-range values."""
    if math.isnan(x):
        raise ValueError("cannot quantize NaN")
    raw = round(x * fmt.scale)  # Python round() is half-to-even
    raw = max(fmt.raw_min, min(fmt.raw_max, raw))
    return FixedScalar(raw, fmt)


def dequantize(s: FixedScalar) -> float:
    return s.to_float()


def multiply_exact(a: FixedScalar, b: FixedScalar) -> int:
    """Exact raw product; a signed 2N-bit value with 2f fractional bits."""
    if a.format != b.format:
        raise FormatMismatchError(f"{a.format} != {b.format}")
    return a.raw * b.raw


@dataclass(frozen=True)
class WideAccumulator:
    """Exact integer accumulator at 2f fractional bits.

    Default width 2N+16 lets 2**16 full-scale products sum without overflow,
    so order of accumulation can never matter.
    """

    raw: int = 0
    width: int = 48

    def __post_init__(self):
        lim = 1 << (self.width - 1)
        if not -lim <= self.raw < lim:
            raise AccumulatorOverflowError(
                f"raw {self.raw} does not fit in {self.width} signed bits"
            )


def accumulator_for(fmt: FixedFormat) -> WideAccumulator:
    return WideAccumulator(0, 2 * fmt.total_bits + 16)


def accumulate(acc: WideAccumulator, product: int) -> WideAccumulator:
    """Exact add of one 2N-bit product; raises on declared-width overflow."""
    return WideAccumulator(acc.raw + product, acc.width)


def rescale_round_half_even(raw: int, shift: int) -> int:
    """Shift ``raw`` right by ``shift`` bits, rounding half-to-even."""
    if shift == 0:
        return raw
    q = raw >> shift
    r = raw & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if r > half or (r == half and q & 1):
        q += 1
    return q


def saturate(raw: int, fmt: FixedFormat) -> int:
    return max(fmt.raw_min, min(fmt.raw_max, raw))


def to_scalar(acc_raw: int, fmt: FixedFormat) -> FixedScalar:
    """Rescale an accumulator value (2f fractional bits) back to ``fmt``."""
    raw = rescale_round_half_even(acc_raw, fmt.frac_bits)
    return FixedScalar(saturate(raw, fmt), fmt)


def relu(acc: WideAccumulator, fmt: FixedFormat) -> FixedScalar:
    """max(acc, 0), then rescale 2f -> f and saturate to ``fmt``."""
    return to_scalar(max(acc.raw, 0), fmt)
