"""Event-based energy and utilization accounting.

Costs are relative, arbitrary units: the default table is deliberately
uncalibrated (multiply dominates, gated lanes leak a little) and only
supports ordering comparisons between Dense / ZeroSkip / NzSkip runs of the
same workload, never absolute power claims.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields


@dataclass(frozen=True)
class EventCounters:
    fetches: int = 0
    lzc_ops: int = 0
    comparisons: int = 0
    buffer_writes: int = 0
    register_latches: int = 0
    multiplies: int = 0
    adds: int = 0
    accumulates: int = 0
    gated_lane_cycles: int = 0
    active_lane_cycles: int = 0

    def merged(self, other: "EventCounters") -> "EventCounters":
        return EventCounters(
            **{
                f.name: getattr(self, f.name) + getattr(other, f.name)
                for f in fields(self)
            }
        )

    def as_dict(self) -> dict[str, int]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


# one energy-unit-per-event entry per counter category
DEFAULT_COSTS = {
    "fetches": 0.2,
    "lzc_ops": 0.2,
    "comparisons": 0.1,
    "buffer_writes": 0.5,
    "register_latches": 0.5,
    "multiplies": 4.0,
    "adds": 1.0,
    "accumulates": 1.0,
    "gated_lane_cycles": 0.05,
    "active_lane_cycles": 0.5,
}


@dataclass(frozen=True)
class EnergyModel:
    costs: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_COSTS))

    def __post_init__(self):
        for name, cost in self.costs.items():
            if name not in DEFAULT_COSTS:
                raise ValueError(f"unknown event category {name!r}")
            if cost < 0:
                raise ValueError(f"cost for {name!r} must be >= 0")

    @classmethod
    def from_json(cls, path) -> "EnergyModel":
        """Load a cost table; missing categories keep their defaults."""
        with open(path) as f:
            overrides = json.load(f)
        costs = dict(DEFAULT_COSTS)
        costs.update({k: float(v) for k, v in overrides.items()})
        return cls(costs)


@dataclass(frozen=True)
class EnergyReport:
    per_category: dict[str, float]

    @property
    def total(self) -> float:
        return sum(self.per_category.values())

    def to_text(self) -> str:
        lines = [f"{name:>20s}: {val:12.2f}" for name, val in self.per_category.items()]
        lines.append(f"{'total':>20s}: {self.total:12.2f}")
        return "\n".join(lines)


def tally(counters: EventCounters, model: EnergyModel | None = None) -> EnergyReport:
    """Linear combination of event counts and per-event costs."""
    model = model or EnergyModel()
    return EnergyReport(
        {name: counters.as_dict()[name] * cost for name, cost in model.costs.items()}
    )


def duty_cycle(active_compute_cycles, total_cycles: int):
    """Per-lane and aggregate fraction of cycles with live computation."""
    if total_cycles <= 0:
        raise ValueError("total_cycles must be > 0")
    per_lane = [a / total_cycles for a in active_compute_cycles]
    aggregate = sum(active_compute_cycles) / (
        len(active_compute_cycles) * total_cycles
    )
    return per_lane, aggregate
