"""Cycle-level model of the 16-lane skip-filtering accelerator.

Streaming model: every cycle one input word and one 16-weight column are
fetched, the filter unit emits per-lane keep bits, and kept pairs are written
into per-lane sub-word buffers.  When a lane's 4-bit counter overflows (16
resident pairs) both operand registers latch and a compute event (16
multiplies + adder tree + accumulate) retires the following cycle.  Lanes
without events stay clock-gated.

Pipeline depths are a minimal two-stage interpretation: buffer write lands in
the fetch cycle, latched words compute one cycle later, and each row tile
costs DRAIN_LATENCY extra cycles to flush partially filled buffers at end of
stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import reference
from .energy import EventCounters
from .fixedpoint import FixedFormat, FixedScalar, to_scalar
from .nzfilter import InvalidThresholdError, NzSkip, SkipMode, nzau_cycle
from .reference import DimensionMismatchError, InputVector, WeightMatrix

DRAIN_LATENCY = 2  # end-of-tile cycles: drain latch + final compute retire


@dataclass(frozen=True)
class AcceleratorConfig:
    mode: SkipMode
    format: FixedFormat = FixedFormat()
    num_lanes: int = 16
    mults_per_lane: int = 16
    strict_threshold_bits: bool = False  # enforce the 5-bit hardware threshold field

    def __post_init__(self):
        if self.num_lanes < 1 or self.mults_per_lane < 1:
            raise ValueError("lane geometry must be positive")
        if (
            self.strict_threshold_bits
            and isinstance(self.mode, NzSkip)
            and self.mode.threshold.level > 31
        ):
            raise InvalidThresholdError(
                "hardware threshold field is 5 bits; level must be <= 31"
            )


@dataclass
class TileStats:
    kept_pairs: list[int]
    flushes: list[int]


@dataclass
class CycleStats:
    total_cycles: int = 0
    active_compute_cycles: list[int] = field(default_factory=list)
    flush_count: list[int] = field(default_factory=list)
    buffer_write_count: list[int] = field(default_factory=list)
    tiles: list[TileStats] = field(default_factory=list)

    def duty_cycles(self):
        return [a / self.total_cycles for a in self.active_compute_cycles]


class ProcessingLane:
    """One lane: paired NI/WT sub-word buffers, operand registers, accumulator."""

    __slots__ = ("depth", "ni_buffer", "wt_buffer", "pending", "accumulator", "gated")

    def __init__(self, depth: int):
        self.depth = depth
        self.ni_buffer: list[int] = []
        self.wt_buffer: list[int] = []
        self.pending: tuple[list[int], list[int]] | None = None  # latched registers
        self.accumulator = 0
        self.gated = True

    @property
    def counter(self) -> int:
        return len(self.wt_buffer)

    def load(self, w_raw: int, x_raw: int) -> bool:
        """Buffer one kept pair; returns True when the write fills the buffers."""
        self.ni_buffer.append(x_raw)
        self.wt_buffer.append(w_raw)
        return self.counter == self.depth

    def latch(self) -> None:
        """Move the assembled full words into the operand registers."""
        self.pending = (self.wt_buffer, self.ni_buffer)
        self.wt_buffer = []
        self.ni_buffer = []

    def retire_compute(self) -> None:
        """Multiply the registered pairs, reduce, and accumulate."""
        wt, ni = self.pending
        self.accumulator += sum(w * x for w, x in zip(wt, ni))
        self.pending = None


class TileSimulator:
    """Drives one 16-row tile of a matvec through the lane array."""

    def __init__(self, cfg: AcceleratorConfig, counters: dict, trace=None, cycle0=0):
        self.cfg = cfg
        self.lanes = [ProcessingLane(cfg.mults_per_lane) for _ in range(cfg.num_lanes)]
        self.counters = counters
        self.trace = trace
        self.cycle = cycle0
        self.active = [0] * cfg.num_lanes
        self.flushes = [0] * cfg.num_lanes
        self.writes = [0] * cfg.num_lanes
        self.drained = False

    def _emit(self, lane: int, mask_hex: str, event: str) -> None:
        if self.trace is not None:
            pl = self.lanes[lane]
            self.trace.write(
                f"{self.cycle},{mask_hex},{lane},{pl.counter},{pl.counter},{event}\n"
            )

    def _retire(self, events: list[str]) -> None:
        for i, lane in enumerate(self.lanes):
            if lane.pending is not None:
                lane.retire_compute()
                lane.gated = False
                self.active[i] += 1
                self.flushes[i] += 1
                self.counters["multiplies"] += self.cfg.mults_per_lane
                self.counters["adds"] += self.cfg.mults_per_lane - 1
                self.counters["accumulates"] += 1
                events[i] = "compute"
            else:
                lane.gated = True

    def step_raw(self, x_raw: int, w_raw_column, keep) -> None:
        """One stream cycle with a precomputed keep mask."""
        if self.drained:
            raise RuntimeError("tile already drained")
        self.cycle += 1
        events = [""] * self.cfg.num_lanes
        self._retire(events)
        self.counters["fetches"] += self.cfg.num_lanes + 1
        self.counters["lzc_ops"] += self.cfg.num_lanes + 1
        self.counters["comparisons"] += self.cfg.num_lanes
        for i, lane in enumerate(self.lanes):
            if keep[i]:
                full = lane.load(w_raw_column[i], x_raw)
                self.writes[i] += 1
                self.counters["buffer_writes"] += 1
                events[i] += "+load" if events[i] else "load"
                if full:
                    lane.latch()
                    self.counters["register_latches"] += 1
                    events[i] += "+latch"
        if self.trace is not None:
            mask_hex = _mask_hex(keep)
            for i, ev in enumerate(events):
                if ev:
                    self._emit(i, mask_hex, ev)

    def step(self, x: FixedScalar, w_words: list[FixedScalar]) -> None:
        """One stream cycle from scalar operands, running the filter unit."""
        mask = nzau_cycle(x, w_words, self.cfg.mode)
        self.step_raw(x.raw, [w.raw for w in w_words], mask.bits)

    def drain(self) -> None:
        """Flush partially filled buffers with zero padding and finish computes."""
        for _ in range(DRAIN_LATENCY):
            self.cycle += 1
            events = [""] * self.cfg.num_lanes
            self._retire(events)
            for i, lane in enumerate(self.lanes):
                if not self.drained and lane.counter > 0:
                    pad = lane.depth - lane.counter
                    lane.ni_buffer.extend([0] * pad)
                    lane.wt_buffer.extend([0] * pad)
                    lane.latch()
                    self.counters["register_latches"] += 1
                    events[i] += "+latch" if events[i] else "latch"
            if self.trace is not None:
                mask_hex = "0" * ((self.cfg.num_lanes + 3) // 4)
                for i, ev in enumerate(events):
                    if ev:
                        self._emit(i, mask_hex, ev)
            self.drained = True

    def outputs(self, apply_relu: bool) -> list[FixedScalar]:
        fmt = self.cfg.format
        return [
            to_scalar(max(l.accumulator, 0) if apply_relu else l.accumulator, fmt)
            for l in self.lanes
        ]


def _mask_hex(keep) -> str:
    word = 0
    for i, b in enumerate(keep):
        if b:
            word |= 1 << i
    return f"{word:0{(len(keep) + 3) // 4}x}"


def _fresh_counter_dict() -> dict:
    return {f: 0 for f in EventCounters().as_dict()}


def run_matvec(
    w: WeightMatrix,
    x: InputVector,
    cfg: AcceleratorConfig,
    apply_relu: bool,
    trace=None,
):
    """Full matvec: row tiles of num_lanes streamed column by column.

    Returns (outputs, CycleStats, EventCounters); outputs are bit-exact equal
    to reference.filtered_matvec under the same mode.
    """
    if w.format != cfg.format or x.format != cfg.format:
        raise DimensionMismatchError("operand format differs from accelerator config")
    if w.cols != x.length:
        raise DimensionMismatchError(f"matrix cols {w.cols} != vector length {x.length}")
    lanes = cfg.num_lanes
    counters = _fresh_counter_dict()
    stats = CycleStats(
        active_compute_cycles=[0] * lanes,
        flush_count=[0] * lanes,
        buffer_write_count=[0] * lanes,
    )
    outputs: list[FixedScalar] = []
    cycle0 = 0
    for start in range(0, max(w.rows, 1), lanes):
        tile_raw = np.zeros((lanes, w.cols), dtype=w.raw.dtype)
        real = min(lanes, w.rows - start)
        tile_raw[:real] = w.raw[start : start + real]
        mask = reference.keep_mask(tile_raw, x.raw, cfg.mode, cfg.format)
        sim = TileSimulator(cfg, counters, trace=trace, cycle0=cycle0)
        for c in range(w.cols):
            # plain Python ints keep lane accumulators exact at any width
            sim.step_raw(int(x.raw[c]), tile_raw[:, c].tolist(), mask[:, c])
        sim.drain()
        cycle0 = sim.cycle
        outputs.extend(sim.outputs(apply_relu)[:real])
        for i in range(lanes):
            stats.active_compute_cycles[i] += sim.active[i]
            stats.flush_count[i] += sim.flushes[i]
            stats.buffer_write_count[i] += sim.writes[i]
        stats.tiles.append(
            TileStats(
                kept_pairs=[int(np.count_nonzero(mask[i])) for i in range(lanes)],
                flushes=list(sim.flushes),
            )
        )
    stats.total_cycles = cycle0
    counters["active_lane_cycles"] = sum(stats.active_compute_cycles)
    counters["gated_lane_cycles"] = lanes * stats.total_cycles - sum(
        stats.active_compute_cycles
    )
    return outputs, stats, EventCounters(**counters)


TRACE_HEADER = "cycle,keep_mask_hex,lane,ni_count,wt_count,event\n"


def run_trace(w: WeightMatrix, x: InputVector, cfg: AcceleratorConfig, sink):
    """Same execution as run_matvec, emitting one CSV row per non-idle lane-cycle."""
    sink.write(TRACE_HEADER)
    return run_matvec(w, x, cfg, apply_relu=False, trace=sink)
