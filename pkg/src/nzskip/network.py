"""Toy network execution and threshold-sweep experiments.

Layer graphs (fully-connected, ReLU, im2col-lowered convolution, flatten) run
every matrix-vector product through the reference model or the lane
simulator, measure per-layer sparsity on the actual activations, and sweep
skip thresholds to trade multiplications against accuracy.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from . import simulator
from .fixedpoint import FixedFormat, saturate
from .nzfilter import (
    NzSkip,
    NzThreshold,
    SkipMode,
    ZeroSkip,
    threshold_from_magnitude,
)
from .reference import (
    DimensionMismatchError,
    InputVector,
    SparsityStats,
    WeightMatrix,
    filtered_matvec,
    measure_sparsity,
)


@dataclass(frozen=True)
class FullyConnected:
    weight: WeightMatrix
    bias_raw: np.ndarray | None = None  # raw units at f fractional bits

    def __post_init__(self):
        if self.bias_raw is not None and len(self.bias_raw) != self.weight.rows:
            raise DimensionMismatchError("bias length must match output rows")


@dataclass(frozen=True)
class Relu:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Conv2d:
    kernel_raw: np.ndarray  # (out_c, in_c, kh, kw) raw units
    stride: int
    padding: int
    format: FixedFormat
    bias_raw: np.ndarray | None = None

    def __post_init__(self):
        if self.kernel_raw.ndim != 4:
            raise ValueError("kernel must be 4-D (out_c, in_c, kh, kw)")


Layer = FullyConnected | Relu | Flatten | Conv2d


@dataclass(frozen=True)
class LayerGraph:
    layers: tuple[Layer, ...]
    format: FixedFormat
    input_shape: tuple[int, ...] | None = None  # (C, H, W) when the graph starts conv


@dataclass(frozen=True)
class ConvPlan:
    """Patch-extraction plan: which padded-input elements feed each output pixel."""

    out_height: int
    out_width: int
    padded_shape: tuple[int, int, int]
    patch_indices: np.ndarray  # (out_h*out_w, in_c*kh*kw) flat indices


def lower_conv(conv: Conv2d, input_shape: tuple[int, int, int]):
    """im2col lowering: a weight matrix plus a patch plan.

    Dense execution of the lowered form equals direct convolution exactly.
    """
    in_c, h, w = input_shape
    out_c, k_in_c, kh, kw = conv.kernel_raw.shape
    if k_in_c != in_c:
        raise DimensionMismatchError(
            f"kernel expects {k_in_c} input channels, activation has {in_c}"
        )
    ph, pw = h + 2 * conv.padding, w + 2 * conv.padding
    oh = (ph - kh) // conv.stride + 1
    ow = (pw - kw) // conv.stride + 1
    if oh < 1 or ow < 1:
        raise DimensionMismatchError("kernel larger than padded input")
    flat = np.arange(in_c * ph * pw).reshape(in_c, ph, pw)
    rows = []
    for oy in range(oh):
        for ox in range(ow):
            y0, x0 = oy * conv.stride, ox * conv.stride
            rows.append(flat[:, y0 : y0 + kh, x0 : x0 + kw].ravel())
    plan = ConvPlan(oh, ow, (in_c, ph, pw), np.stack(rows))
    matrix = WeightMatrix.from_raw(
        conv.kernel_raw.reshape(out_c, in_c * kh * kw), conv.format
    )
    return matrix, plan


def im2col(activation_raw: np.ndarray, plan: ConvPlan, padding_value: int = 0):
    """Apply a patch plan: (out_positions, patch_len) matrix of raw values."""
    in_c, ph, pw = plan.padded_shape
    c, h, w = activation_raw.shape
    padded = np.full((in_c, ph, pw), padding_value, dtype=activation_raw.dtype)
    y0 = (ph - h) // 2
    x0 = (pw - w) // 2
    padded[:, y0 : y0 + h, x0 : x0 + w] = activation_raw
    return padded.ravel()[plan.patch_indices]


@dataclass
class LayerResult:
    name: str
    stats: SparsityStats


@dataclass
class ForwardResult:
    output_raw: np.ndarray
    layer_stats: list[LayerResult]

    def total_stats(self) -> SparsityStats:
        total = SparsityStats(0, 0, 0)
        for lr in self.layer_stats:
            total = total.merged(lr.stats)
        return total


def _engine_matvec(w, x, mode, engine, fmt):
    if engine == "simulator":
        cfg = simulator.AcceleratorConfig(mode=mode, format=fmt)
        out, _, _ = simulator.run_matvec(w, x, cfg, apply_relu=False)
        return np.array([s.raw for s in out], dtype=np.int64)
    return np.array(
        [s.raw for s in filtered_matvec(w, x, mode, apply_relu=False)], dtype=np.int64
    )


def _add_bias(raw: np.ndarray, bias_raw, fmt: FixedFormat) -> np.ndarray:
    if bias_raw is None:
        return raw
    return np.array(
        [saturate(int(r) + int(b), fmt) for r, b in zip(raw, bias_raw)], dtype=np.int64
    )


def forward(
    graph: LayerGraph, input_raw, mode: SkipMode, engine: str = "reference"
) -> ForwardResult:
    """Run one sample through the graph, measuring sparsity per matvec layer."""
    if engine not in ("reference", "simulator"):
        raise ValueError(f"unknown engine {engine!r}")
    fmt = graph.format
    act = np.asarray(input_raw)
    if graph.input_shape is not None and act.ndim == 1:
        act = act.reshape(graph.input_shape)
    layer_stats: list[LayerResult] = []
    n_mat = 0
    for layer in graph.layers:
        if isinstance(layer, FullyConnected):
            n_mat += 1
            if act.ndim != 1:
                raise DimensionMismatchError("fully-connected layer needs a flat input")
            x = InputVector.from_raw(act, fmt)
            stats = measure_sparsity(layer.weight, x, mode)
            out = _engine_matvec(layer.weight, x, mode, engine, fmt)
            act = _add_bias(out, layer.bias_raw, fmt)
            layer_stats.append(LayerResult(f"fc{n_mat}", stats))
        elif isinstance(layer, Conv2d):
            n_mat += 1
            if act.ndim != 3:
                raise DimensionMismatchError("conv layer needs a (C, H, W) input")
            matrix, plan = lower_conv(layer, act.shape)
            patches = im2col(act, plan)
            stats = SparsityStats(0, 0, 0)
            pixels = []
            for patch in patches:
                x = InputVector.from_raw(patch, fmt)
                stats = stats.merged(measure_sparsity(matrix, x, mode))
                out = _engine_matvec(matrix, x, mode, engine, fmt)
                pixels.append(_add_bias(out, layer.bias_raw, fmt))
            out_c = matrix.rows
            act = (
                np.stack(pixels)
                .reshape(plan.out_height, plan.out_width, out_c)
                .transpose(2, 0, 1)
            )
            layer_stats.append(LayerResult(f"conv{n_mat}", stats))
        elif isinstance(layer, Relu):
            act = np.maximum(act, 0)
        elif isinstance(layer, Flatten):
            act = act.reshape(-1)
        else:
            raise TypeError(f"unknown layer {layer!r}")
    return ForwardResult(act, layer_stats)


def conv2d_direct(conv: Conv2d, activation_raw: np.ndarray) -> np.ndarray:
    """Plain nested-loop convolution oracle (exact ints, pre-bias, pre-rescale).

    Returns accumulator values at 2f fractional bits; used only by tests to
    check the im2col lowering.
    """
    in_c, h, w = activation_raw.shape
    out_c, _, kh, kw = conv.kernel_raw.shape
    p = conv.padding
    padded = np.zeros((in_c, h + 2 * p, w + 2 * p), dtype=np.int64)
    padded[:, p : p + h, p : p + w] = activation_raw
    oh = (h + 2 * p - kh) // conv.stride + 1
    ow = (w + 2 * p - kw) // conv.stride + 1
    out = np.zeros((out_c, oh, ow), dtype=np.int64)
    for oc in range(out_c):
        for oy in range(oh):
            for ox in range(ow):
                acc = 0
                for ic in range(in_c):
                    for ky in range(kh):
                        for kx in range(kw):
                            acc += int(conv.kernel_raw[oc, ic, ky, kx]) * int(
                                padded[ic, oy * conv.stride + ky, ox * conv.stride + kx]
                            )
                out[oc, oy, ox] = acc
    return out


# ---------------------------------------------------------------------------
# threshold sweeps


@dataclass(frozen=True)
class SweepConfig:
    thresholds: tuple  # NzThreshold levels (int) or real product magnitudes (float)
    engine: str = "reference"

    def __post_init__(self):
        if not self.thresholds:
            raise ValueError("sweep needs at least one threshold")


@dataclass(frozen=True)
class ReportRow:
    threshold: int  # LZC-sum level
    layer: str
    nz_sparsity: float
    zero_sparsity: float
    kept_mults: int
    reduction_factor: float
    accuracy: float


@dataclass
class SparsityReport:
    rows: list[ReportRow] = field(default_factory=list)

    def write_csv(self, sink) -> None:
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(
            [
                "threshold",
                "layer",
                "nz_sparsity",
                "zero_sparsity",
                "kept_mults",
                "reduction_factor",
                "accuracy",
            ]
        )
        for r in self.rows:
            writer.writerow(
                [
                    r.threshold,
                    r.layer,
                    f"{r.nz_sparsity:.6f}",
                    f"{r.zero_sparsity:.6f}",
                    r.kept_mults,
                    f"{r.reduction_factor:.6f}",
                    f"{r.accuracy:.6f}",
                ]
            )


def resolve_threshold(t, fmt: FixedFormat) -> NzThreshold:
    """Accept either an LZC-sum level (int) or a real product magnitude (float)."""
    if isinstance(t, NzThreshold):
        return t
    if isinstance(t, bool):
        raise ValueError("threshold must be an int level or float magnitude")
    if isinstance(t, int):
        return NzThreshold(t)
    return threshold_from_magnitude(float(t), fmt)


def _aggregate_run(graph, dataset, mode, engine):
    """Per-layer merged stats and accuracy over one labeled dataset."""
    per_layer: dict[str, SparsityStats] = {}
    correct = 0
    for input_raw, label in dataset:
        res = forward(graph, input_raw, mode, engine=engine)
        for lr in res.layer_stats:
            prev = per_layer.get(lr.name, SparsityStats(0, 0, 0))
            per_layer[lr.name] = prev.merged(lr.stats)
        if int(np.argmax(res.output_raw)) == label:
            correct += 1
    return per_layer, correct / len(dataset)


def sweep(graph: LayerGraph, dataset, cfg: SweepConfig) -> SparsityReport:
    """Run NzSkip at each threshold; report vs the ZeroSkip baseline.

    reduction_factor is kept multiplications under ZeroSkip divided by kept
    multiplications at the threshold (>= 1 for levels below N).
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    base_layers, _base_acc = _aggregate_run(graph, dataset, ZeroSkip(), cfg.engine)
    report = SparsityReport()
    for t in cfg.thresholds:
        level = resolve_threshold(t, graph.format)
        per_layer, acc = _aggregate_run(graph, dataset, NzSkip(level), cfg.engine)
        total = SparsityStats(0, 0, 0)
        base_total = SparsityStats(0, 0, 0)
        for name in per_layer:
            total = total.merged(per_layer[name])
            base_total = base_total.merged(base_layers[name])
            report.rows.append(_row(level.level, name, per_layer[name], base_layers[name], acc))
        report.rows.append(_row(level.level, "total", total, base_total, acc))
    return report


def _row(level, name, stats, base, acc) -> ReportRow:
    if stats.kept_pairs > 0:
        reduction = base.kept_pairs / stats.kept_pairs
    else:
        reduction = float("inf")
    return ReportRow(
        threshold=level,
        layer=name,
        nz_sparsity=stats.nz_sparsity,
        zero_sparsity=stats.zero_sparsity,
        kept_mults=stats.kept_pairs,
        reduction_factor=reduction,
        accuracy=acc,
    )


# ---------------------------------------------------------------------------
# model / dataset files


def graph_to_dict(graph: LayerGraph) -> dict:
    layers = []
    for layer in graph.layers:
        if isinstance(layer, FullyConnected):
            layers.append(
                {
                    "type": "fc",
                    "rows": layer.weight.rows,
                    "cols": layer.weight.cols,
                    "weights": [int(v) for v in layer.weight.raw.ravel()],
                    "bias": None
                    if layer.bias_raw is None
                    else [int(v) for v in layer.bias_raw],
                }
            )
        elif isinstance(layer, Conv2d):
            oc, ic, kh, kw = layer.kernel_raw.shape
            layers.append(
                {
                    "type": "conv2d",
                    "out_channels": oc,
                    "in_channels": ic,
                    "kernel_h": kh,
                    "kernel_w": kw,
                    "stride": layer.stride,
                    "padding": layer.padding,
                    "weights": [int(v) for v in layer.kernel_raw.ravel()],
                    "bias": None
                    if layer.bias_raw is None
                    else [int(v) for v in layer.bias_raw],
                }
            )
        elif isinstance(layer, Relu):
            layers.append({"type": "relu"})
        elif isinstance(layer, Flatten):
            layers.append({"type": "flatten"})
    d = {
        "format": {"bits": graph.format.total_bits, "frac": graph.format.frac_bits},
        "layers": layers,
    }
    if graph.input_shape is not None:
        d["input_shape"] = list(graph.input_shape)
    return d


def graph_from_dict(d: dict) -> LayerGraph:
    fmt = FixedFormat(d["format"]["bits"], d["format"]["frac"])
    layers: list[Layer] = []
    for spec in d["layers"]:
        kind = spec["type"]
        if kind == "fc":
            raw = np.array(spec["weights"], dtype=np.int64).reshape(
                spec["rows"], spec["cols"]
            )
            bias = None if spec.get("bias") is None else np.array(spec["bias"])
            layers.append(FullyConnected(WeightMatrix.from_raw(raw, fmt), bias))
        elif kind == "conv2d":
            raw = np.array(spec["weights"], dtype=np.int64).reshape(
                spec["out_channels"], spec["in_channels"], spec["kernel_h"], spec["kernel_w"]
            )
            bias = None if spec.get("bias") is None else np.array(spec["bias"])
            layers.append(Conv2d(raw, spec["stride"], spec["padding"], fmt, bias))
        elif kind == "relu":
            layers.append(Relu())
        elif kind == "flatten":
            layers.append(Flatten())
        else:
            raise ValueError(f"unknown layer type {kind!r}")
    shape = tuple(d["input_shape"]) if "input_shape" in d else None
    return LayerGraph(tuple(layers), fmt, shape)


def save_model(graph: LayerGraph, path) -> None:
    with open(path, "w") as f:
        json.dump(graph_to_dict(graph), f)


def load_model(path) -> LayerGraph:
    with open(path) as f:
        return graph_from_dict(json.load(f))


def load_dataset(path) -> list[tuple[np.ndarray, int]]:
    """JSON array of {"input": [raw ints], "label": int}."""
    with open(path) as f:
        entries = json.load(f)
    return [
        (np.array(e["input"], dtype=np.int64), int(e["label"])) for e in entries
    ]


def save_dataset(dataset, path) -> None:
    with open(path, "w") as f:
        json.dump(
            [{"input": [int(v) for v in inp], "label": int(lab)} for inp, lab in dataset],
            f,
        )


def _asset_path(name: str):
    return resources.files("nzskip").joinpath("assets", name)


def load_toy_mlp() -> LayerGraph:
    with resources.as_file(_asset_path("toy_mlp.json")) as p:
        return load_model(p)


def load_toy_cnn() -> LayerGraph:
    with resources.as_file(_asset_path("toy_cnn.json")) as p:
        return load_model(p)


def load_toy_dataset() -> list[tuple[np.ndarray, int]]:
    with resources.as_file(_asset_path("toy_dataset.json")) as p:
        return load_dataset(p)
