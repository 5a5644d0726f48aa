"""Exhaustive 8-bit validation of the product-LZC bound and skip safety.

Run at 8-bit operand width so every pair can be enumerated: 255*255 nonzero
pairs for the product bound, 256*256 pairs times 17 threshold levels for the
skip-safety bound.  An injectable lzc function exists so tests can verify
that a corrupted counter is actually caught.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass

import numpy as np

from .nzfilter import lzc

BITS = 8


@dataclass(frozen=True)
class CheckResult:
    name: str
    cases: int
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _lzc_table(lzc_fn, bits: int) -> np.ndarray:
    return np.array([lzc_fn(v, bits) for v in range(1 << bits)], dtype=np.int64)


def check_product_lzc_bound(lzc_fn=lzc) -> CheckResult:
    """Every nonzero pair's 2N-bit product LZC is lA+lB or lA+lB+1."""
    table = _lzc_table(lzc_fn, BITS)
    a = np.arange(1, 1 << BITS, dtype=np.int64)
    lsum = table[a][:, None] + table[a][None, :]
    prod = a[:, None] * a[None, :]
    _, exp = np.frexp(prod.astype(np.float64))
    prod_lzc = 2 * BITS - exp
    bad = (prod_lzc < lsum) | (prod_lzc > lsum + 1)
    return CheckResult("product-lzc-bound", int(prod.size), int(np.count_nonzero(bad)))


def check_skip_safety(lzc_fn=lzc) -> CheckResult:
    """Every pair skipped at level L has |product| < 2**(2N-L-1)."""
    table = _lzc_table(lzc_fn, BITS)
    a = np.arange(1 << BITS, dtype=np.int64)
    lsum = table[a][:, None] + table[a][None, :]
    prod = a[:, None] * a[None, :]
    cases = 0
    violations = 0
    for level in range(2 * BITS + 1):
        skipped = lsum > level
        cases += int(prod.size)
        # integer-safe form of prod < 2**(2N-level-1)
        bad = skipped & (prod * (1 << (level + 1)) >= 1 << (2 * BITS))
        violations += int(np.count_nonzero(bad))
    return CheckResult("skip-safety-bound", cases, violations)


def run_selftest(lzc_fn=lzc, out=None) -> bool:
    """Run all exhaustive checks, print one line per property; True iff all pass."""
    out = out if out is not None else sys.stdout
    ok = True
    for result in (check_product_lzc_bound(lzc_fn), check_skip_safety(lzc_fn)):
        status = "PASS" if result.passed else "FAIL"
        out.write(
            f"{status} {result.name}: {result.cases} cases, "
            f"{result.violations} violations\n"
        )
        ok = ok and result.passed
    return ok
