import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nzskip.fixedpoint import (
    AccumulatorOverflowError,
    FixedFormat,
    FixedScalar,
    FormatMismatchError,
    WideAccumulator,
    accumulate,
    accumulator_for,
    dequantize,
    multiply_exact,
    quantize,
    relu,
    rescale_round_half_even,
)

Q88 = FixedFormat(16, 8)


class TestFormat:
    def test_defaults(self):
        fmt = FixedFormat()
        assert fmt.total_bits == 16 and fmt.frac_bits == 8
        assert fmt.raw_min == -32768 and fmt.raw_max == 32767

    @pytest.mark.parametrize("bits,frac", [(1, 0), (33, 0), (16, 16), (16, -1)])
    def test_invalid(self, bits, frac):
        with pytest.raises(ValueError):
            FixedFormat(bits, frac)

    def test_scalar_range_checked(self):
        with pytest.raises(ValueError):
            FixedScalar(32768, Q88)
        with pytest.raises(ValueError):
            FixedScalar(-32769, Q88)


class TestQuantize:
    def test_zero(self):
        assert quantize(0.0, Q88).raw == 0

    def test_one(self):
        assert quantize(1.0, Q88).raw == 256

    def test_saturates(self):
        # 200 * 256 = 51200 > 32767
        assert quantize(200.0, Q88).raw == 32767
        assert quantize(-200.0, Q88).raw == -32768

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            quantize(float("nan"), Q88)

    @given(st.floats(min_value=-127.0, max_value=127.0))
    def test_round_trip_error_bound(self, x):
        s = quantize(x, Q88)
        assert abs(dequantize(s) - x) <= 2 ** -9 + 1e-12

    def test_half_to_even(self):
        fmt = FixedFormat(16, 1)
        assert quantize(0.25, fmt).raw == 0  # 0.5 raw rounds to even 0
        assert quantize(0.75, fmt).raw == 2  # 1.5 raw rounds to even 2


class TestMultiply:
    def test_small(self):
        assert multiply_exact(FixedScalar(3, Q88), FixedScalar(5, Q88)) == 15

    def test_extreme(self):
        a = FixedScalar(-32768, Q88)
        assert multiply_exact(a, a) == 1073741824

    def test_format_mismatch(self):
        with pytest.raises(FormatMismatchError):
            multiply_exact(FixedScalar(1, Q88), FixedScalar(1, FixedFormat(16, 4)))

    @given(st.integers(-32768, 32767), st.integers(-32768, 32767))
    def test_commutative_and_zero(self, a, b):
        sa, sb = FixedScalar(a, Q88), FixedScalar(b, Q88)
        assert multiply_exact(sa, sb) == multiply_exact(sb, sa) == a * b
        assert multiply_exact(sa, FixedScalar(0, Q88)) == 0


class TestAccumulate:
    def test_basics(self):
        acc = accumulator_for(Q88)
        assert acc.width == 48
        assert accumulate(acc, 15).raw == 15
        assert accumulate(acc, 0).raw == 0

    def test_sixteen_max_products(self):
        acc = accumulator_for(Q88)
        for _ in range(16):
            acc = accumulate(acc, 1073741824)
        assert acc.raw == 17179869184

    def test_overflow_detected(self):
        with pytest.raises(AccumulatorOverflowError):
            accumulate(WideAccumulator(0, 8), 200)

    def test_order_independent(self):
        products = [random.Random(3).randrange(-(2 ** 30), 2 ** 30) for _ in range(50)]
        acc1 = accumulator_for(Q88)
        for p in products:
            acc1 = accumulate(acc1, p)
        shuffled = list(products)
        random.Random(4).shuffle(shuffled)
        acc2 = accumulator_for(Q88)
        for p in shuffled:
            acc2 = accumulate(acc2, p)
        assert acc1.raw == acc2.raw


class TestRelu:
    def test_negative_clamps(self):
        assert relu(WideAccumulator(-5, 48), Q88).raw == 0

    def test_zero(self):
        assert relu(WideAccumulator(0, 48), Q88).raw == 0

    def test_rescale(self):
        # 256 at 16 fractional bits is 2**-8, i.e. raw 1 at 8 fractional bits
        assert relu(WideAccumulator(256, 48), Q88).raw == 1

    def test_saturates(self):
        huge = 32768 * 256  # would rescale beyond raw_max
        assert relu(WideAccumulator(huge, 48), Q88).raw == 32767

    @given(st.integers(-(2 ** 40), 2 ** 40))
    def test_nonnegative(self, raw):
        assert relu(WideAccumulator(raw, 48), Q88).raw >= 0


class TestRescaleRounding:
    @given(st.integers(-(2 ** 40), 2 ** 40), st.integers(1, 16))
    def test_matches_fraction_oracle(self, raw, shift):
        got = rescale_round_half_even(raw, shift)
        exact = Fraction(raw, 1 << shift)
        lo = math.floor(exact)
        # round-half-even on the exact rational
        frac = exact - lo
        if frac > Fraction(1, 2) or (frac == Fraction(1, 2) and lo % 2 == 1):
            expected = lo + 1
        else:
            expected = lo
        assert got == expected
