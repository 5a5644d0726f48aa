"""Golden, architecture-free matvec semantics.

Exact integer arithmetic throughout, so every result is order-independent and
bit-exact; the lane simulator is diffed against this module.  Internals are
vectorized with numpy (int64 is exact for formats up to 23 bits; wider
formats fall back to object arrays of Python ints).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fixedpoint import (
    FixedFormat,
    FixedScalar,
    WideAccumulator,
    accumulator_for,
    quantize,
    to_scalar,
)
from .nzfilter import Dense, SkipMode, ZeroSkip, validate_mode


class DimensionMismatchError(ValueError):
    pass


def _int_dtype(fmt: FixedFormat):
    # int64 products need 2N-2 bits plus summation headroom
    return np.int64 if fmt.total_bits <= 23 else object


@dataclass(frozen=True)
class WeightMatrix:
    raw: np.ndarray  # (rows, cols), raw fixed-point units
    format: FixedFormat

    def __post_init__(self):
        if self.raw.ndim != 2:
            raise ValueError("weight matrix must be 2-D")

    @property
    def rows(self) -> int:
        return self.raw.shape[0]

    @property
    def cols(self) -> int:
        return self.raw.shape[1]

    @classmethod
    def from_raw(cls, rows_of_raw, fmt: FixedFormat) -> "WeightMatrix":
        arr = np.array(rows_of_raw, dtype=_int_dtype(fmt))
        if arr.ndim != 2:
            raise ValueError("expected a 2-D array of raw values")
        if arr.size and (arr.max() > fmt.raw_max or arr.min() < fmt.raw_min):
            raise ValueError("raw value outside format range")
        return cls(arr, fmt)

    @classmethod
    def from_floats(cls, values, fmt: FixedFormat) -> "WeightMatrix":
        arr = np.asarray(values, dtype=float)
        raw = np.array(
            [[quantize(float(v), fmt).raw for v in row] for row in arr],
            dtype=_int_dtype(fmt),
        )
        return cls(raw, fmt)

    def scalar(self, i: int, j: int) -> FixedScalar:
        return FixedScalar(int(self.raw[i, j]), self.format)


@dataclass(frozen=True)
class InputVector:
    raw: np.ndarray  # (cols,), raw fixed-point units
    format: FixedFormat

    @property
    def length(self) -> int:
        return self.raw.shape[0]

    @classmethod
    def from_raw(cls, values, fmt: FixedFormat) -> "InputVector":
        arr = np.array(values, dtype=_int_dtype(fmt))
        if arr.ndim != 1:
            raise ValueError("expected a 1-D array of raw values")
        if arr.size and (arr.max() > fmt.raw_max or arr.min() < fmt.raw_min):
            raise ValueError("raw value outside format range")
        return cls(arr, fmt)

    @classmethod
    def from_floats(cls, values, fmt: FixedFormat) -> "InputVector":
        raw = np.array(
            [quantize(float(v), fmt).raw for v in values], dtype=_int_dtype(fmt)
        )
        return cls(raw, fmt)

    def scalar(self, j: int) -> FixedScalar:
        return FixedScalar(int(self.raw[j]), self.format)


@dataclass(frozen=True)
class Partition:
    """One output row's products split into kept / exactly-zero / skipped."""

    p1_indices: tuple[int, ...]
    p2_indices: tuple[int, ...]
    p3_indices: tuple[int, ...]
    p1_sum: WideAccumulator
    p2_sum: WideAccumulator
    p3_sum: WideAccumulator


@dataclass(frozen=True)
class SparsityStats:
    total_pairs: int
    skipped_pairs: int
    zero_pairs: int

    @property
    def nz_sparsity(self) -> float:
        return self.skipped_pairs / self.total_pairs if self.total_pairs else 0.0

    @property
    def zero_sparsity(self) -> float:
        return self.zero_pairs / self.total_pairs if self.total_pairs else 0.0

    @property
    def kept_pairs(self) -> int:
        return self.total_pairs - self.skipped_pairs

    def merged(self, other: "SparsityStats") -> "SparsityStats":
        return SparsityStats(
            self.total_pairs + other.total_pairs,
            self.skipped_pairs + other.skipped_pairs,
            self.zero_pairs + other.zero_pairs,
        )


def _check_dims(w: WeightMatrix, x: InputVector) -> None:
    if w.format != x.format:
        raise DimensionMismatchError("matrix and vector formats differ")
    if w.cols != x.length:
        raise DimensionMismatchError(f"matrix cols {w.cols} != vector length {x.length}")


def _lzc_array(mag: np.ndarray, bits: int) -> np.ndarray:
    """Vectorized leading-zero count of nonnegative magnitudes < 2**bits."""
    if mag.dtype == object:
        return np.array([bits - int(m).bit_length() for m in mag.ravel()]).reshape(
            mag.shape
        )
    # frexp exponent of a positive integer equals its bit length; exact below 2**53
    _, exp = np.frexp(mag.astype(np.float64))
    return bits - np.where(mag == 0, 0, exp)


def _sat_abs(raw: np.ndarray, fmt: FixedFormat) -> np.ndarray:
    return np.minimum(np.abs(raw), fmt.raw_max)


def keep_mask(w_raw: np.ndarray, x_raw: np.ndarray, mode: SkipMode, fmt: FixedFormat):
    """Boolean keep matrix for raw weights (rows, cols) against raw inputs (cols,)."""
    validate_mode(mode, fmt)
    if isinstance(mode, Dense):
        return np.ones(np.broadcast_shapes(w_raw.shape, x_raw.shape), dtype=bool)
    if isinstance(mode, ZeroSkip):
        return (w_raw != 0) & (x_raw != 0)
    n = fmt.total_bits
    l_sum = _lzc_array(_sat_abs(w_raw, fmt), n) + _lzc_array(_sat_abs(x_raw, fmt), n)
    return l_sum <= mode.threshold.level


def _masked_row_sums(w: WeightMatrix, x: InputVector, mask: np.ndarray) -> list[int]:
    prod = w.raw * x.raw[np.newaxis, :]
    if prod.dtype == object or w.cols == 0:
        return [
            sum(int(p) for p, m in zip(prow, mrow) if m)
            for prow, mrow in zip(prod, mask)
        ]
    # guard int64 row sums for wide formats / huge rows
    if 2 * w.format.total_bits - 2 + max(1, w.cols).bit_length() > 62:
        prod = prod.astype(object)
    return [int(s) for s in np.where(mask, prod, 0).sum(axis=1)]


def dense_matvec(w: WeightMatrix, x: InputVector, apply_relu: bool) -> list[FixedScalar]:
    """Exact matvec; optional ReLU; rescaled back to the operand format."""
    _check_dims(w, x)
    sums = _masked_row_sums(w, x, np.ones((w.rows, w.cols), dtype=bool))
    return [_finish(s, w.format, apply_relu) for s in sums]


def filtered_matvec(
    w: WeightMatrix, x: InputVector, mode: SkipMode, apply_relu: bool
) -> list[FixedScalar]:
    """Matvec where skipped products contribute zero (the approximated sum)."""
    _check_dims(w, x)
    mask = keep_mask(w.raw, x.raw, mode, w.format)
    sums = _masked_row_sums(w, x, mask)
    return [_finish(s, w.format, apply_relu) for s in sums]


def _finish(acc_raw: int, fmt: FixedFormat, apply_relu: bool) -> FixedScalar:
    if apply_relu:
        acc_raw = max(acc_raw, 0)
    return to_scalar(acc_raw, fmt)


def partition(w: WeightMatrix, x: InputVector, mode: SkipMode) -> list[Partition]:
    """Split each row's pairs into kept-nonzero, exact-zero, skipped-nonzero.

    The three sums always recombine to the dense pre-activation exactly.
    """
    _check_dims(w, x)
    mask = keep_mask(w.raw, x.raw, mode, w.format)
    prod = w.raw * x.raw[np.newaxis, :]
    out = []
    width = accumulator_for(w.format).width
    for i in range(w.rows):
        p1, p2, p3 = [], [], []
        s1 = s2 = s3 = 0
        for j in range(w.cols):
            p = int(prod[i, j])
            if p == 0:
                p2.append(j)
            elif mask[i, j]:
                p1.append(j)
                s1 += p
            else:
                p3.append(j)
                s3 += p
        out.append(
            Partition(
                tuple(p1),
                tuple(p2),
                tuple(p3),
                WideAccumulator(s1, width),
                WideAccumulator(s2, width),
                WideAccumulator(s3, width),
            )
        )
    return out


def measure_sparsity(w: WeightMatrix, x: InputVector, mode: SkipMode) -> SparsityStats:
    _check_dims(w, x)
    mask = keep_mask(w.raw, x.raw, mode, w.format)
    zero = (w.raw == 0) | (x.raw[np.newaxis, :] == 0)
    zero = np.broadcast_to(zero, (w.rows, w.cols))
    return SparsityStats(
        total_pairs=w.rows * w.cols,
        skipped_pairs=int(w.rows * w.cols - np.count_nonzero(mask)),
        zero_pairs=int(np.count_nonzero(zero)),
    )
