#!/usr/bin/env python3
"""Threshold sweep on the shipped toy MLP: sparsity vs accuracy.

Lowering the skip level L grows the near-zero sparsity well past the
zero-valued baseline; the interesting region is where multiplications drop
sharply while accuracy barely moves.
"""

from nzskip.network import SweepConfig, load_toy_dataset, load_toy_mlp, sweep

graph = load_toy_mlp()
dataset = load_toy_dataset()
levels = (32, 26, 22, 20, 19, 18, 17, 16)
report = sweep(graph, dataset, SweepConfig(thresholds=levels))

print(f"{len(dataset)} samples, layers: "
      + ", ".join(sorted({r.layer for r in report.rows if r.layer != 'total'})))
print("\n  L   nz-sparsity  zero-sparsity  kept mults  reduction  accuracy")
for r in report.rows:
    if r.layer == "total":
        print(f" {r.threshold:>2}   {r.nz_sparsity:>10.3f}  {r.zero_sparsity:>12.3f}  "
              f"{r.kept_mults:>10}  {r.reduction_factor:>8.2f}x  {r.accuracy:>7.3f}")

print("\n(reduction is kept multiplications under plain zero-skipping divided"
      "\n by kept multiplications at the level; L=19 is the pinned sweet spot)")
