import numpy as np
import pytest

from nzskip import Dense, FixedFormat, NzSkip, ZeroSkip
from nzskip.network import (
    Conv2d,
    Flatten,
    FullyConnected,
    LayerGraph,
    Relu,
    SweepConfig,
    WeightMatrix,
    conv2d_direct,
    forward,
    graph_from_dict,
    graph_to_dict,
    im2col,
    load_toy_cnn,
    load_toy_dataset,
    load_toy_mlp,
    lower_conv,
    resolve_threshold,
    sweep,
)
from nzskip.reference import DimensionMismatchError

Q88 = FixedFormat(16, 8)


def tiny_mlp(rng):
    w1 = rng.integers(-500, 500, size=(6, 8))
    w2 = rng.integers(-500, 500, size=(4, 6))
    return LayerGraph(
        (
            FullyConnected(WeightMatrix.from_raw(w1, Q88), None),
            Relu(),
            FullyConnected(WeightMatrix.from_raw(w2, Q88), np.array([1, -2, 0, 3])),
        ),
        Q88,
    )


class TestLowerConv:
    def test_one_by_one_kernel(self):
        kernel = np.arange(6).reshape(2, 3, 1, 1)
        conv = Conv2d(kernel, stride=1, padding=0, format=Q88)
        matrix, plan = lower_conv(conv, (3, 4, 4))
        assert matrix.rows == 2 and matrix.cols == 3
        assert plan.out_height == 4 and plan.out_width == 4
        np.testing.assert_array_equal(
            matrix.raw, kernel.reshape(2, 3)
        )

    def test_3x3_matches_direct_convolution(self):
        rng = np.random.default_rng(0)
        kernel = rng.integers(-50, 50, size=(2, 1, 3, 3))
        conv = Conv2d(kernel, stride=1, padding=0, format=Q88)
        act = rng.integers(-100, 100, size=(1, 5, 5))
        matrix, plan = lower_conv(conv, act.shape)
        assert plan.out_height == 3 and plan.out_width == 3
        patches = im2col(act, plan)
        direct = conv2d_direct(conv, act)
        for pos, patch in enumerate(patches):
            oy, ox = divmod(pos, plan.out_width)
            for oc in range(2):
                assert int(matrix.raw[oc] @ patch) == direct[oc, oy, ox]

    def test_padding(self):
        rng = np.random.default_rng(1)
        kernel = rng.integers(-50, 50, size=(1, 2, 3, 3))
        conv = Conv2d(kernel, stride=2, padding=1, format=Q88)
        act = rng.integers(-100, 100, size=(2, 6, 6))
        matrix, plan = lower_conv(conv, act.shape)
        patches = im2col(act, plan)
        direct = conv2d_direct(conv, act)
        for pos, patch in enumerate(patches):
            oy, ox = divmod(pos, plan.out_width)
            assert int(matrix.raw[0] @ patch) == direct[0, oy, ox]

    def test_all_zero_kernel(self):
        conv = Conv2d(np.zeros((1, 1, 2, 2), dtype=np.int64), 1, 0, Q88)
        act = np.ones((1, 4, 4), dtype=np.int64)
        direct = conv2d_direct(conv, act)
        assert not direct.any()

    def test_channel_mismatch(self):
        conv = Conv2d(np.zeros((1, 2, 2, 2), dtype=np.int64), 1, 0, Q88)
        with pytest.raises(DimensionMismatchError):
            lower_conv(conv, (3, 4, 4))


class TestForward:
    def test_zeroskip_equals_dense(self):
        rng = np.random.default_rng(2)
        graph = tiny_mlp(rng)
        inp = rng.integers(-200, 200, size=8)
        a = forward(graph, inp, Dense())
        b = forward(graph, inp, ZeroSkip())
        np.testing.assert_array_equal(a.output_raw, b.output_raw)

    @pytest.mark.parametrize(
        "mode", [Dense(), ZeroSkip(), NzSkip.at_level(18), NzSkip.at_level(24)]
    )
    def test_engine_equivalence(self, mode):
        rng = np.random.default_rng(3)
        graph = tiny_mlp(rng)
        inp = rng.integers(-200, 200, size=8)
        ref = forward(graph, inp, mode, engine="reference")
        sim = forward(graph, inp, mode, engine="simulator")
        np.testing.assert_array_equal(ref.output_raw, sim.output_raw)
        for a, b in zip(ref.layer_stats, sim.layer_stats):
            assert a.stats == b.stats

    def test_engine_equivalence_conv(self):
        graph = load_toy_cnn()
        inp, _ = load_toy_dataset()[0]
        mode = NzSkip.at_level(20)
        ref = forward(graph, inp, mode, engine="reference")
        sim = forward(graph, inp, mode, engine="simulator")
        np.testing.assert_array_equal(ref.output_raw, sim.output_raw)

    def test_deeper_hidden_layer_sparser_on_toy_mlp(self):
        # dense inputs feed fc1; ReLU zeros accumulate, so fc2 sees sparser
        # operands than fc1 (the 10-way classifier head stays dense)
        graph = load_toy_mlp()
        dataset = load_toy_dataset()[:20]
        mode = NzSkip.at_level(20)
        agg = {}
        for inp, _ in dataset:
            for lr in forward(graph, inp, mode).layer_stats:
                prev = agg.get(lr.name)
                agg[lr.name] = prev.merged(lr.stats) if prev else lr.stats
        assert agg["fc2"].nz_sparsity >= agg["fc1"].nz_sparsity
        assert agg["fc2"].zero_sparsity >= agg["fc1"].zero_sparsity

    def test_shape_errors(self):
        rng = np.random.default_rng(4)
        graph = tiny_mlp(rng)
        with pytest.raises(DimensionMismatchError):
            forward(graph, np.zeros(5, dtype=np.int64), Dense())


class TestSweep:
    def test_keep_all_matches_dense_accuracy(self):
        graph = load_toy_mlp()
        dataset = load_toy_dataset()[:40]
        dense_correct = sum(
            int(np.argmax(forward(graph, inp, Dense()).output_raw)) == label
            for inp, label in dataset
        )
        report = sweep(graph, dataset, SweepConfig(thresholds=(32,)))
        total_rows = [r for r in report.rows if r.layer == "total"]
        assert total_rows[0].accuracy == dense_correct / len(dataset)

    def test_sparsity_monotone_across_levels(self):
        graph = load_toy_mlp()
        dataset = load_toy_dataset()[:15]
        report = sweep(graph, dataset, SweepConfig(thresholds=(32, 24, 20, 16, 8, 0)))
        totals = [r for r in report.rows if r.layer == "total"]
        for a, b in zip(totals, totals[1:]):
            assert b.nz_sparsity >= a.nz_sparsity

    def test_reduction_factor_above_one_below_n(self):
        graph = load_toy_mlp()
        dataset = load_toy_dataset()[:15]
        report = sweep(graph, dataset, SweepConfig(thresholds=(15, 12)))
        for r in report.rows:
            if r.layer == "total":
                assert r.reduction_factor >= 1.0

    def test_magnitude_thresholds_resolved(self):
        graph = load_toy_mlp()
        dataset = load_toy_dataset()[:5]
        report = sweep(graph, dataset, SweepConfig(thresholds=(0.5,)))
        assert report.rows[0].threshold == 16
        assert resolve_threshold(0.5, Q88).level == 16
        assert resolve_threshold(16, Q88).level == 16

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            SweepConfig(thresholds=())
        with pytest.raises(ValueError):
            sweep(load_toy_mlp(), [], SweepConfig(thresholds=(16,)))


class TestModelIo:
    def test_round_trip(self):
        rng = np.random.default_rng(5)
        graph = tiny_mlp(rng)
        again = graph_from_dict(graph_to_dict(graph))
        assert len(again.layers) == len(graph.layers)
        np.testing.assert_array_equal(
            again.layers[0].weight.raw, graph.layers[0].weight.raw
        )
        np.testing.assert_array_equal(again.layers[2].bias_raw, graph.layers[2].bias_raw)

    def test_conv_round_trip(self):
        graph = load_toy_cnn()
        again = graph_from_dict(graph_to_dict(graph))
        np.testing.assert_array_equal(
            again.layers[0].kernel_raw, graph.layers[0].kernel_raw
        )
        assert again.input_shape == (1, 8, 8)

    def test_unknown_layer_type(self):
        with pytest.raises(ValueError):
            graph_from_dict(
                {"format": {"bits": 16, "frac": 8}, "layers": [{"type": "pool"}]}
            )

    def test_toy_assets_load(self):
        mlp = load_toy_mlp()
        dataset = load_toy_dataset()
        assert mlp.format == Q88
        assert len(dataset) == 200
        assert all(0 <= label <= 9 for _, label in dataset)
        flatten = [l for l in load_toy_cnn().layers if isinstance(l, Flatten)]
        assert flatten
