import json

import numpy as np
import pytest

from nzskip.cli import main
from nzskip import FixedFormat
from nzskip.network import (
    FullyConnected,
    LayerGraph,
    WeightMatrix,
    load_toy_dataset,
    save_dataset,
    save_model,
)

Q88 = FixedFormat(16, 8)


@pytest.fixture
def matrix_model(tmp_path):
    rng = np.random.default_rng(17)
    w = rng.integers(-2000, 2000, size=(5, 7))
    w[rng.random(w.shape) < 0.3] = 0
    graph = LayerGraph((FullyConnected(WeightMatrix.from_raw(w, Q88), None),), Q88)
    path = tmp_path / "matrix.json"
    save_model(graph, path)
    return path


@pytest.fixture
def vector_file(tmp_path):
    rng = np.random.default_rng(18)
    x = rng.integers(-2000, 2000, size=7)
    x[2] = 0
    path = tmp_path / "vec.json"
    path.write_text(json.dumps([int(v) for v in x]))
    return path


def run(*argv):
    return main(list(argv))


class TestMatvec:
    def test_dense_equals_zeroskip(self, matrix_model, vector_file, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        assert run("matvec", "--model", str(matrix_model), "--input", str(vector_file),
                   "--mode", "dense", "--out", str(out_a)) == 0
        assert run("matvec", "--model", str(matrix_model), "--input", str(vector_file),
                   "--mode", "zeroskip", "--out", str(out_b)) == 0
        a = json.loads(out_a.read_text())
        b = json.loads(out_b.read_text())
        assert a["output_raw"] == b["output_raw"]

    def test_engines_agree(self, matrix_model, vector_file, tmp_path):
        outs = []
        for engine in ("ref", "sim"):
            out = tmp_path / f"{engine}.json"
            assert run("matvec", "--model", str(matrix_model), "--input", str(vector_file),
                       "--mode", "nz", "--lzc-threshold", "16",
                       "--engine", engine, "--out", str(out)) == 0
            outs.append(json.loads(out.read_text())["output_raw"])
        assert outs[0] == outs[1]

    def test_missing_input_names_path(self, matrix_model, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert run("matvec", "--model", str(matrix_model), "--input", str(missing)) == 1
        assert str(missing) in capsys.readouterr().err

    def test_nz_requires_threshold(self, matrix_model, vector_file):
        assert run("matvec", "--model", str(matrix_model), "--input", str(vector_file),
                   "--mode", "nz") == 1

    def test_threshold_mag_echoed(self, matrix_model, vector_file, capsys):
        assert run("matvec", "--model", str(matrix_model), "--input", str(vector_file),
                   "--mode", "nz", "--threshold-mag", "0.5") == 0
        assert "lzc level 16" in capsys.readouterr().out

    def test_deterministic_output(self, matrix_model, vector_file, tmp_path):
        out_a = tmp_path / "a.json"
        out_b = tmp_path / "b.json"
        args = ["matvec", "--model", str(matrix_model), "--input", str(vector_file),
                "--mode", "nz", "--lzc-threshold", "20", "--engine", "sim"]
        assert run(*args, "--out", str(out_a)) == 0
        assert run(*args, "--out", str(out_b)) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_multi_fc_model_rejected(self, tmp_path, vector_file):
        w = WeightMatrix.from_raw(np.zeros((2, 2), dtype=np.int64), Q88)
        graph = LayerGraph((FullyConnected(w, None), FullyConnected(w, None)), Q88)
        path = tmp_path / "two.json"
        save_model(graph, path)
        assert run("matvec", "--model", str(path), "--input", str(vector_file)) == 1


class TestTrace:
    def test_trace_file_written(self, matrix_model, vector_file, tmp_path):
        trace = tmp_path / "trace.csv"
        assert run("trace", "--model", str(matrix_model), "--input", str(vector_file),
                   "--mode", "zeroskip", "--trace", str(trace)) == 0
        lines = trace.read_text().splitlines()
        assert lines[0] == "cycle,keep_mask_hex,lane,ni_count,wt_count,event"
        assert len(lines) > 1


class TestSweep:
    @pytest.fixture
    def dataset_file(self, tmp_path):
        path = tmp_path / "dataset.json"
        save_dataset(load_toy_dataset()[:10], path)
        return path

    @pytest.fixture
    def mlp_file(self, tmp_path):
        from nzskip.network import load_toy_mlp

        path = tmp_path / "mlp.json"
        save_model(load_toy_mlp(), path)
        return path

    def test_sweep_csv(self, mlp_file, dataset_file, tmp_path):
        out = tmp_path / "report.csv"
        assert run("sweep", "--model", str(mlp_file), "--dataset", str(dataset_file),
                   "--lzc-threshold", "32", "--lzc-threshold", "19",
                   "--out", str(out)) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == (
            "threshold,layer,nz_sparsity,zero_sparsity,kept_mults,"
            "reduction_factor,accuracy"
        )
        totals = [l for l in lines if ",total," in l]
        assert len(totals) == 2

    def test_sweep_deterministic(self, mlp_file, dataset_file, tmp_path):
        out_a, out_b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["sweep", "--model", str(mlp_file), "--dataset", str(dataset_file),
                "--lzc-threshold", "20"]
        assert run(*args, "--out", str(out_a)) == 0
        assert run(*args, "--out", str(out_b)) == 0
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_sweep_needs_thresholds(self, mlp_file, dataset_file):
        assert run("sweep", "--model", str(mlp_file), "--dataset", str(dataset_file)) == 1

    def test_malformed_dataset(self, mlp_file, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert run("sweep", "--model", str(mlp_file), "--dataset", str(bad),
                   "--lzc-threshold", "16") == 1


class TestSelftest:
    def test_passes_and_reports_counts(self, capsys):
        assert run("selftest") == 0
        out = capsys.readouterr().out
        assert "65025 cases" in out
        assert "PASS" in out and "FAIL" not in out

    def test_corrupted_lzc_detected(self, capsys):
        assert run("selftest", "--corrupt-lzc") == 2
        assert "FAIL" in capsys.readouterr().out
