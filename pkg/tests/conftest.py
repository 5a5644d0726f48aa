import numpy as np
import pytest

from nzskip import FixedFormat, NzSkip, WeightMatrix, InputVector

# Worked buffering example: which stream cycles (1-indexed, first 8) load a
# pair into each lane.  Lane 0 (PL1) loads exactly in cycles 1, 5 and 8.
FIG4_LOADS = {
    0: {1, 5, 8},
    1: {2, 6},
    2: {3},
    3: {1, 4, 7},
    4: {5},
    5: {2, 8},
    6: {4},
    7: {1, 6},
    8: {3, 7},
    9: {8},
    10: {2, 5},
    11: {6},
    12: {1, 8},
    13: {4, 7},
    14: {3},
    15: {5, 6},
}

FIG4_FORMAT = FixedFormat(16, 8)
FIG4_MODE = NzSkip.at_level(16)
# raw 256 has lzc 7 (kept: 7+7=14 <= 16); raw 16 has lzc 11 (skipped: 18 > 16)
_KEPT_RAW = 256
_SKIPPED_RAW = 16


@pytest.fixture
def fig4_case():
    w = np.full((16, 8), _SKIPPED_RAW, dtype=np.int64)
    for lane, cycles in FIG4_LOADS.items():
        for c in cycles:
            w[lane, c - 1] = _KEPT_RAW
    x = np.full(8, _KEPT_RAW, dtype=np.int64)
    return (
        WeightMatrix.from_raw(w, FIG4_FORMAT),
        InputVector.from_raw(x, FIG4_FORMAT),
        FIG4_MODE,
    )


def random_matvec_case(rng, fmt=None, max_dim=100):
    """One random raw matrix/vector pair sharing a format."""
    if fmt is None:
        bits = int(rng.choice([8, 12, 16]))
        frac = int(rng.integers(0, bits))
        fmt = FixedFormat(bits, frac)
    rows = int(rng.integers(1, max_dim + 1))
    cols = int(rng.integers(1, max_dim + 1))
    lo, hi = fmt.raw_min, fmt.raw_max
    w = rng.integers(lo, hi + 1, size=(rows, cols))
    x = rng.integers(lo, hi + 1, size=cols)
    # sprinkle exact zeros so zero-skipping has something to do
    w[rng.random(w.shape) < 0.25] = 0
    x[rng.random(x.shape) < 0.25] = 0
    return WeightMatrix.from_raw(w, fmt), InputVector.from_raw(x, fmt)
