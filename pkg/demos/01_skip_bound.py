#!/usr/bin/env python3
"""How leading-zero counts predict a product's magnitude.

Walks through the core trick: the sum of two operands' leading-zero counts
pins the product's leading-zero count to one of two values, so a cheap
compare against a threshold decides whether the multiplication is worth
doing at all.
"""

from nzskip import (
    FixedFormat,
    FixedScalar,
    NzSkip,
    lzc,
    nz_filter,
    product_lzc_bounds,
    quantize,
    threshold_from_magnitude,
)

fmt = FixedFormat(16, 8)  # Q8.8

print("=== leading-zero counts as magnitude proxies ===")
for value in (0.004, 0.25, 1.0, 100.0):
    s = quantize(value, fmt)
    print(f"  {value:>8} -> raw {s.raw:>6} lzc {lzc(s.magnitude(), 16):>2}")

print("\n=== the two-value product bound ===")
for a, b in ((3, 5), (100, 100), (20000, 2)):
    la, lb = lzc(a, 16), lzc(b, 16)
    lo, hi = product_lzc_bounds(la, lb, 16)
    actual = 32 - (a * b).bit_length()
    print(f"  {a} * {b}: lA+lB = {la + lb}, predicted lzc in [{lo}, {hi}], "
          f"actual {actual}")

print("\n=== mapping a real-valued threshold to a skip level ===")
for t in (2.0, 0.5, 0.125, 0.03125):
    level = threshold_from_magnitude(t, fmt).level
    print(f"  skip products |p| < {t:<8} -> level L = {level}")

print("\n=== filtering in action (L = 16, products below 0.5 skipped) ===")
mode = NzSkip.at_level(16)
for a, b in ((0.1, 0.2), (0.7, 0.6), (10.0, 0.001), (5.0, 3.0)):
    sa, sb = quantize(a, fmt), quantize(b, fmt)
    verdict = "keep" if nz_filter(sa, sb, mode) else "skip"
    print(f"  {a} * {b} = {a * b:<8.4g} -> {verdict}")
