"""Near-zero multiplication filtering via leading-zero counts.

The product of two N-bit magnitudes with leading-zero counts lA and lB has a
leading-zero count (over 2N bits) of either lA+lB or lA+lB+1, so the LZC sum
predicts the product's magnitude without multiplying.  A pair is skipped when
the sum exceeds a threshold level L.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .fixedpoint import FixedFormat, FixedScalar


class ZeroOperandError(ValueError):
    """Product LZC bounds are only defined for nonzero operands."""


class InvalidThresholdError(ValueError):
    pass


def lzc(u: int, bits: int) -> int:
    """Leading zeros of ``u`` viewed as a ``bits``-wide unsigned word.

    lzc(0) == bits; any value with the top bit set counts 0.
    """
    if u < 0 or u >= (1 << bits):
        raise ValueError(f"{u} is not a {bits}-bit unsigned value")
    return bits - u.bit_length()


def product_lzc_bounds(la: int, lb: int, bits: int) -> tuple[int, int]:
    """Closed interval containing the 2N-bit product's leading-zero count.

    Requires both operands nonzero (la, lb < bits); the true count is always
    la+lb or la+lb+1.
    """
    if la >= bits or lb >= bits:
        raise ZeroOperandError("bounds require nonzero operands")
    return la + lb, la + lb + 1


@dataclass(frozen=True)
class NzThreshold:
    """Skip level in leading-zero-sum units, 0 .. 2N."""

    level: int

    def __post_init__(self):
        if not 0 <= self.level <= 64:
            raise InvalidThresholdError(f"level {self.level} out of range")


class Dense:
    """Keep every pair."""

    def __eq__(self, other):
        return isinstance(other, Dense)

    def __hash__(self):
        return hash("dense")

    def __repr__(self):
        return "Dense()"


class ZeroSkip:
    """Skip pairs where either operand is exactly zero."""

    def __eq__(self, other):
        return isinstance(other, ZeroSkip)

    def __hash__(self):
        return hash("zeroskip")

    def __repr__(self):
        return "ZeroSkip()"


@dataclass(frozen=True)
class NzSkip:
    """Skip pairs whose LZC sum exceeds ``threshold.level``."""

    threshold: NzThreshold

    @classmethod
    def at_level(cls, level: int) -> "NzSkip":
        return cls(NzThreshold(level))


SkipMode = Dense | ZeroSkip | NzSkip


def validate_mode(mode: SkipMode, fmt: FixedFormat) -> None:
    if isinstance(mode, NzSkip) and mode.threshold.level > 2 * fmt.total_bits:
        raise InvalidThresholdError(
            f"level {mode.threshold.level} exceeds 2N={2 * fmt.total_bits}"
        )


def nz_filter(a: FixedScalar, b: FixedScalar, mode: SkipMode) -> bool:
    """True when the pair must be multiplied, False when it is skipped.

    NzSkip keeps ties (lzc sum == L); skipping requires strictly exceeding L.
    """
    if isinstance(mode, Dense):
        return True
    if isinstance(mode, ZeroSkip):
        return a.raw != 0 and b.raw != 0
    n = a.format.total_bits
    l_total = lzc(a.magnitude(), n) + lzc(b.magnitude(), n)
    return l_total <= mode.threshold.level


def threshold_from_magnitude(t: float, fmt: FixedFormat) -> NzThreshold:
    """Smallest LZC-sum level whose skips all have |product value| < ``t``.

    A skipped pair has LZC sum >= L+1, hence raw product magnitude below
    2**(2N-L-1), i.e. value magnitude below 2**(2N-2f-L-1).
    """
    if not t > 0:
        raise InvalidThresholdError(f"threshold magnitude must be > 0, got {t}")
    n2 = 2 * fmt.total_bits
    level = math.ceil(n2 - 2 * fmt.frac_bits - math.log2(t)) - 1
    return NzThreshold(max(0, min(n2, level)))


@dataclass(frozen=True)
class KeepMask:
    """Per-lane keep/skip verdicts for one streamed cycle (the data_ld word)."""

    bits: tuple[bool, ...]

    def __post_init__(self):
        if len(self.bits) != 16:
            raise ValueError("mask must cover 16 lanes")

    def to_hex(self) -> str:
        word = sum(1 << i for i, b in enumerate(self.bits) if b)
        return f"{word:04x}"

    def count(self) -> int:
        return sum(self.bits)


def nzau_cycle(x: FixedScalar, weights: list[FixedScalar], mode: SkipMode) -> KeepMask:
    """One filter-unit cycle: 16 weights against one shared input.

    The shared input's LZC is computed once and reused for all 16 lanes, as in
    a 17-LZC-unit datapath; semantically identical to 16 nz_filter calls.
    """
    if len(weights) != 16:
        raise ValueError("expected 16 weights per cycle")
    fmt = x.format
    for w in weights:
        if w.format != fmt:
            raise ValueError("all 17 operands must share one format")
    if isinstance(mode, Dense):
        return KeepMask((True,) * 16)
    if isinstance(mode, ZeroSkip):
        if x.raw == 0:
            return KeepMask((False,) * 16)
        return KeepMask(tuple(w.raw != 0 for w in weights))
    n = fmt.total_bits
    lx = lzc(x.magnitude(), n)
    level = mode.threshold.level
    return KeepMask(tuple(lzc(w.magnitude(), n) + lx <= level for w in weights))
