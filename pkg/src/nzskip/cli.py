"""Command-line front end: matvec runs, forward passes, sweeps, traces, selftest."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import network, reference, simulator
from .energy import EnergyModel, duty_cycle, tally
from .fixedpoint import FixedFormat
from .nzfilter import Dense, NzSkip, NzThreshold, ZeroSkip, threshold_from_magnitude
from .selftest import run_selftest


class CliError(Exception):
    pass


def _parse_format(text: str) -> FixedFormat:
    try:
        bits, frac = text.split(".")
        return FixedFormat(int(bits), int(frac))
    except (ValueError, TypeError) as e:
        raise CliError(f"bad --format {text!r}, expected <bits>.<frac>") from e


def _resolve_mode(args, fmt: FixedFormat):
    if args.mode == "dense":
        return Dense()
    if args.mode == "zeroskip":
        return ZeroSkip()
    if args.lzc_threshold is not None:
        return NzSkip(NzThreshold(args.lzc_threshold))
    if args.threshold_mag is not None:
        level = threshold_from_magnitude(args.threshold_mag, fmt)
        print(f"threshold magnitude {args.threshold_mag} -> lzc level {level.level}")
        return NzSkip(level)
    raise CliError("--mode nz requires --lzc-threshold or --threshold-mag")


def _load_graph(args) -> network.LayerGraph:
    try:
        graph = network.load_model(args.model)
    except OSError as e:
        raise CliError(f"cannot read model file {args.model}: {e}") from e
    except (KeyError, ValueError, json.JSONDecodeError) as e:
        raise CliError(f"malformed model file {args.model}: {e}") from e
    if args.format is not None:
        fmt = _parse_format(args.format)
        graph = network.graph_from_dict(
            {
                **network.graph_to_dict(graph),
                "format": {"bits": fmt.total_bits, "frac": fmt.frac_bits},
            }
        )
    return graph


def _load_vector(path) -> np.ndarray:
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise CliError(f"cannot read input file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise CliError(f"malformed input file {path}: {e}") from e
    if isinstance(data, dict):
        data = data.get("input")
    if not isinstance(data, list):
        raise CliError(f"input file {path} must hold a JSON array of raw ints")
    return np.array(data, dtype=np.int64)


def _single_matrix(graph: network.LayerGraph) -> network.FullyConnected:
    fcs = [l for l in graph.layers if isinstance(l, network.FullyConnected)]
    if len(fcs) != 1 or len(graph.layers) != 1:
        raise CliError("matvec expects a model file with exactly one fc layer")
    return fcs[0]


def _print_energy(counters, args):
    model = EnergyModel.from_json(args.energy_model) if args.energy_model else EnergyModel()
    report = tally(counters, model)
    print("energy (arbitrary units, uncalibrated):")
    print(report.to_text())


def cmd_matvec(args) -> int:
    graph = _load_graph(args)
    fc = _single_matrix(graph)
    fmt = graph.format
    mode = _resolve_mode(args, fmt)
    x = reference.InputVector.from_raw(_load_vector(args.input), fmt)
    stats = reference.measure_sparsity(fc.weight, x, mode)
    result = {
        "mode": args.mode,
        "nz_sparsity": stats.nz_sparsity,
        "zero_sparsity": stats.zero_sparsity,
        "kept_mults": stats.kept_pairs,
    }
    trace_sink = open(args.trace, "w") if args.trace else None
    try:
        if args.engine == "sim" or args.trace:
            cfg = simulator.AcceleratorConfig(mode=mode, format=fmt)
            if trace_sink:
                trace_sink.write(simulator.TRACE_HEADER)
            out, cstats, counters = simulator.run_matvec(
                fc.weight, x, cfg, apply_relu=False, trace=trace_sink
            )
            per_lane, aggregate = duty_cycle(
                cstats.active_compute_cycles, cstats.total_cycles
            )
            result["total_cycles"] = cstats.total_cycles
            result["duty_cycle"] = aggregate
            print(f"total cycles: {cstats.total_cycles}  duty cycle: {aggregate:.4f}")
            _print_energy(counters, args)
        else:
            out = reference.filtered_matvec(fc.weight, x, mode, apply_relu=False)
    finally:
        if trace_sink:
            trace_sink.close()
    raw = [s.raw for s in out]
    result["output_raw"] = raw
    print(f"output raw: {raw}")
    print(f"nz_sparsity: {stats.nz_sparsity:.4f}  zero_sparsity: {stats.zero_sparsity:.4f}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(result, f, sort_keys=True)
    return 0


def cmd_forward(args) -> int:
    graph = _load_graph(args)
    mode = _resolve_mode(args, graph.format)
    engine = "simulator" if args.engine == "sim" else "reference"
    res = network.forward(graph, _load_vector(args.input), mode, engine=engine)
    print(f"output raw: {[int(v) for v in np.ravel(res.output_raw)]}")
    for lr in res.layer_stats:
        print(
            f"{lr.name}: nz_sparsity={lr.stats.nz_sparsity:.4f} "
            f"zero_sparsity={lr.stats.zero_sparsity:.4f} kept={lr.stats.kept_pairs}"
        )
    total = res.total_stats()
    print(f"total: nz_sparsity={total.nz_sparsity:.4f} kept={total.kept_pairs}")
    if args.out:
        with open(args.out, "w") as f:
            json.dump(
                {
                    "output_raw": [int(v) for v in np.ravel(res.output_raw)],
                    "layers": {
                        lr.name: {
                            "nz_sparsity": lr.stats.nz_sparsity,
                            "zero_sparsity": lr.stats.zero_sparsity,
                            "kept_mults": lr.stats.kept_pairs,
                        }
                        for lr in res.layer_stats
                    },
                },
                f,
                sort_keys=True,
            )
    return 0


def cmd_sweep(args) -> int:
    graph = _load_graph(args)
    try:
        dataset = network.load_dataset(args.dataset)
    except OSError as e:
        raise CliError(f"cannot read dataset file {args.dataset}: {e}") from e
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise CliError(f"malformed dataset file {args.dataset}: {e}") from e
    thresholds: list = []
    if args.lzc_threshold is not None:
        thresholds.extend(args.lzc_threshold)
    if args.threshold_mag is not None:
        thresholds.extend(float(m) for m in args.threshold_mag)
    if not thresholds:
        raise CliError("sweep requires at least one --lzc-threshold or --threshold-mag")
    engine = "simulator" if args.engine == "sim" else "reference"
    cfg = network.SweepConfig(thresholds=tuple(thresholds), engine=engine)
    report = network.sweep(graph, dataset, cfg)
    if args.out:
        with open(args.out, "w") as f:
            report.write_csv(f)
        print(f"wrote {len(report.rows)} report rows to {args.out}")
    else:
        report.write_csv(sys.stdout)
    return 0


def cmd_trace(args) -> int:
    args.engine = "sim"
    return cmd_matvec(args)


def cmd_selftest(args) -> int:
    lzc_fn = None
    if args.corrupt_lzc:
        from .nzfilter import lzc as real_lzc

        def lzc_fn(u, bits):  # negative-control hook: off by one
            return max(0, real_lzc(u, bits) - 1)

    ok = run_selftest(lzc_fn) if lzc_fn else run_selftest()
    return 0 if ok else 2


def _add_common(p, need_input=True):
    p.add_argument("--model", required=True, help="model JSON file")
    if need_input:
        p.add_argument("--input", required=True, help="input vector JSON file")
    p.add_argument("--mode", choices=["dense", "zeroskip", "nz"], default="dense")
    p.add_argument("--lzc-threshold", type=int, help="skip level L in [0, 2N]")
    p.add_argument("--threshold-mag", type=float, help="real product magnitude bound")
    p.add_argument("--format", help="override fixed-point format, e.g. 16.8")
    p.add_argument("--engine", choices=["ref", "sim"], default="ref")
    p.add_argument("--energy-model", help="JSON cost table for the energy report")
    p.add_argument("--out", help="write results to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nzskip",
        description="Near-zero multiplication skipping: matvec runs, sweeps, "
        "cycle traces, and exhaustive self-checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("matvec", help="run one matrix-vector product")
    _add_common(p)
    p.add_argument("--trace", help="write a per-cycle CSV trace (forces sim engine)")
    p.set_defaults(func=cmd_matvec)

    p = sub.add_parser("forward", help="run a full layer graph on one input")
    _add_common(p)
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("sweep", help="threshold sweep over a labeled dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True, help="labeled dataset JSON file")
    p.add_argument("--lzc-threshold", type=int, action="append")
    p.add_argument("--threshold-mag", action="append")
    p.add_argument("--format")
    p.add_argument("--engine", choices=["ref", "sim"], default="ref")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("trace", help="matvec on the simulator with a cycle trace")
    _add_common(p)
    p.add_argument("--trace", required=True, help="trace CSV output path")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("selftest", help="exhaustive 8-bit bound checks")
    p.add_argument(
        "--corrupt-lzc", action="store_true", help=argparse.SUPPRESS
    )  # negative-control test hook
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
