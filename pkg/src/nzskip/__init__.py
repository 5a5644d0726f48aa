"""Near-zero multiplication skipping for fixed-point matrix-vector products.

Leading-zero counts of the two operands bound the product's leading zeros, so
near-zero products can be predicted and skipped without multiplying.  The
package provides the fixed-point substrate, the skip filter, a golden
reference matvec, a cycle-level model of a 16-lane accelerator built around
the filter, a toy-network sweep harness, and an event-based energy model.
"""

from .fixedpoint import (
    FixedFormat,
    FixedScalar,
    WideAccumulator,
    accumulate,
    accumulator_for,
    dequantize,
    multiply_exact,
    quantize,
    relu,
)
from .nzfilter import (
    Dense,
    KeepMask,
    NzSkip,
    NzThreshold,
    SkipMode,
    ZeroSkip,
    lzc,
    nz_filter,
    nzau_cycle,
    product_lzc_bounds,
    threshold_from_magnitude,
)
from .reference import (
    InputVector,
    SparsityStats,
    WeightMatrix,
    dense_matvec,
    filtered_matvec,
    measure_sparsity,
    partition,
)
from .simulator import AcceleratorConfig, CycleStats, run_matvec, run_trace
from .energy import EnergyModel, EventCounters, duty_cycle, tally

__all__ = [
    "FixedFormat",
    "FixedScalar",
    "WideAccumulator",
    "accumulate",
    "accumulator_for",
    "dequantize",
    "multiply_exact",
    "quantize",
    "relu",
    "Dense",
    "KeepMask",
    "NzSkip",
    "NzThreshold",
    "SkipMode",
    "ZeroSkip",
    "lzc",
    "nz_filter",
    "nzau_cycle",
    "product_lzc_bounds",
    "threshold_from_magnitude",
    "InputVector",
    "SparsityStats",
    "WeightMatrix",
    "dense_matvec",
    "filtered_matvec",
    "measure_sparsity",
    "partition",
    "AcceleratorConfig",
    "CycleStats",
    "run_matvec",
    "run_trace",
    "EnergyModel",
    "EventCounters",
    "duty_cycle",
    "tally",
]
