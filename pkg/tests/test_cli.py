import numpy as np
import pytest

from oblitree import load_model
from oblitree.cli import EXIT_DATA, EXIT_MISMATCH, EXIT_OK, EXIT_USAGE, main
from oblitree.dataio import DataError, ingest_csv, write_data_csv


def run(argv):
    return main(argv)


def gen_small_model(tmp_path, name="m.json", dims=1, trees=15, depth=3, features=6,
                    seed=5):
    path = tmp_path / name
    assert run([
        "gen-model", "--features", str(features), "--trees", str(trees),
        "--depth", str(depth), "--dims", str(dims), "--borders", "8",
        "--seed", str(seed), "--out", str(path),
    ]) == EXIT_OK
    return path


def gen_small_data(tmp_path, model, rows=40, name="d.csv", consistent=False, seed=2):
    path = tmp_path / name
    argv = ["gen-data", "--model", str(model), "--rows", str(rows),
            "--seed", str(seed), "--out", str(path)]
    if consistent:
        argv.append("--consistent-labels")
    assert run(argv) == EXIT_OK
    return path


def test_gen_model_default_is_loadable(tmp_path):
    out = tmp_path / "default.json"
    assert run(["gen-model", "--trees", "5", "--depth", "2", "--out", str(out)]) == EXIT_OK
    ensemble = load_model(out)
    assert ensemble.n_features == 90


def test_gen_model_reproducible_bytes(tmp_path):
    a = gen_small_model(tmp_path, "a.json", seed=9)
    b = gen_small_model(tmp_path, "b.json", seed=9)
    assert a.read_bytes() == b.read_bytes()


def test_gen_model_multiclass_depth8_shape(tmp_path):
    out = tmp_path / "cover.json"
    assert run(["gen-model", "--features", "54", "--trees", "8", "--depth", "8",
                "--dims", "7", "--borders", "16", "--out", str(out)]) == EXIT_OK
    ensemble = load_model(out)
    assert ensemble.n_dims == 7
    assert ensemble.trees[0].leaf_values.shape == (256, 7)


def test_gen_data_roundtrip(tmp_path):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=25)
    X, labels = ingest_csv(data)
    assert X.shape == (25, 6)
    assert labels is None


def test_gen_data_seed_reproducible(tmp_path):
    model = gen_small_model(tmp_path)
    a = gen_small_data(tmp_path, model, name="a.csv", seed=7)
    b = gen_small_data(tmp_path, model, name="b.csv", seed=7)
    assert a.read_bytes() == b.read_bytes()


def test_gen_data_consistent_labels_single_dim_rejected(tmp_path):
    model = gen_small_model(tmp_path, dims=1)
    code = run(["gen-data", "--model", str(model), "--rows", "5",
                "--consistent-labels", "--out", str(tmp_path / "x.csv")])
    assert code == EXIT_USAGE


def test_predict_minimal_row_count(tmp_path, capsys):
    model = gen_small_model(tmp_path)
    data = tmp_path / "one.csv"
    write_data_csv(data, np.zeros((1, 6), np.float32))
    out = tmp_path / "p.csv"
    assert run(["predict", "--model", str(model), "--data", str(data),
                "--repeat", "1", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 2  # header + one row


def test_predict_backend_files_identical(tmp_path):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=130)
    out_s = tmp_path / "scalar.csv"
    out_v = tmp_path / "vec.csv"
    for backend, out in (("scalar", out_s), ("vec:8", out_v)):
        assert run(["predict", "--model", str(model), "--data", str(data),
                    "--backend", backend, "--repeat", "1", "--out", str(out)]) == EXIT_OK
    assert out_s.read_bytes() == out_v.read_bytes()


def test_predict_worker_files_identical(tmp_path):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=300)
    outs = []
    for workers in ("1", "4"):
        out = tmp_path / f"w{workers}.csv"
        outs.append(out)
        assert run(["predict", "--model", str(model), "--data", str(data),
                    "--backend", "vec:8", "--workers", workers,
                    "--repeat", "1", "--out", str(out)]) == EXIT_OK
    assert outs[0].read_bytes() == outs[1].read_bytes()


def test_predict_accuracy_line(tmp_path, capsys):
    model = gen_small_model(tmp_path, dims=3)
    data = gen_small_data(tmp_path, model, rows=60, consistent=True)
    assert run(["predict", "--model", str(model), "--data", str(data),
                "--transform", "softmax-argmax", "--repeat", "1"]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "accuracy: 1.0" in stdout


def test_predict_mae_line(tmp_path, capsys):
    model = gen_small_model(tmp_path, dims=1)
    data = gen_small_data(tmp_path, model, rows=10)
    # graft a label column equal to column f0 to exercise the MAE path
    X, _ = ingest_csv(data)
    write_data_csv(data, X, labels=X[:, 0].astype(np.float64))
    assert run(["predict", "--model", str(model), "--data", str(data),
                "--repeat", "1"]) == EXIT_OK
    assert "mae: " in capsys.readouterr().out


def test_predict_profile_report_printed(tmp_path, capsys):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=20)
    assert run(["predict", "--model", str(model), "--data", str(data),
                "--profile", "--repeat", "1", "--report", "tsv"]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "calc_trees_blocked" in stdout
    assert "binarize_floats" in stdout


def test_bench_report_and_columns(tmp_path, capsys):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=64)
    out = tmp_path / "report.tsv"
    assert run(["bench", "--model", str(model), "--data", str(data),
                "--backend", "vec:4", "--report", "tsv", "--out", str(out)]) == EXIT_OK
    stdout = capsys.readouterr().out
    assert "outputs identical across backends" in stdout
    assert "total_speedup:" in stdout
    header = out.read_text().splitlines()[0].split("\t")
    assert header == ["function", "call_count", "baseline_time_s", "baseline_pct",
                      "optimized_time_s", "optimized_pct", "speedup"]


def test_bench_mismatch_exit_code(tmp_path, monkeypatch, capsys):
    model = gen_small_model(tmp_path)
    data = gen_small_data(tmp_path, model, rows=16)
    import oblitree.cli as cli_mod

    real = cli_mod.predict_batch
    calls = {"n": 0}

    def corrupted(*args, **kwargs):
        result = real(*args, **kwargs)
        calls["n"] += 1
        if calls["n"] == 2:  # flip one value on the optimized leg
            result.raw[0, 0] += 1.0
        return result

    monkeypatch.setattr(cli_mod, "predict_batch", corrupted)
    code = run(["bench", "--model", str(model), "--data", str(data),
                "--backend", "vec:8"])
    assert code == EXIT_MISMATCH
    err = capsys.readouterr().err
    assert "refusing to report performance" in err


def test_knn_features_output(tmp_path):
    rng = np.random.default_rng(12)
    corpus = tmp_path / "corpus.csv"
    queries = tmp_path / "queries.csv"
    write_data_csv(corpus, rng.standard_normal((20, 3)).astype(np.float32),
                   labels=rng.integers(0, 4, 20))
    write_data_csv(queries, rng.standard_normal((5, 3)).astype(np.float32))
    out = tmp_path / "feats.csv"
    assert run(["knn-features", "--corpus", str(corpus), "--data", str(queries),
                "--k", "3", "--backend", "vec:4", "--out", str(out)]) == EXIT_OK
    X, labels = ingest_csv(out)
    assert X.shape == (5, 5)  # 4 class shares + mean distance
    assert labels is None
    shares = X[:, :4].astype(np.float64)
    assert np.allclose(shares.sum(axis=1), 1.0)


def test_exit_codes(tmp_path):
    assert run(["predict", "--model", str(tmp_path / "none.json"),
                "--data", str(tmp_path / "none.csv")]) == EXIT_DATA
    assert run(["no-such-command"]) == EXIT_USAGE
    assert run(["predict"]) == EXIT_USAGE  # missing required flags
    assert run(["predict", "--model", "m", "--data", "d",
                "--backend", "vec:5"]) == EXIT_USAGE
    assert run(["--help"]) == EXIT_OK


def test_ingest_ragged_row(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f0,f1\n1.0,2.0\n3.0\n")
    with pytest.raises(DataError, match="line 3: expected 2 columns, got 1"):
        ingest_csv(path)


def test_ingest_bad_cell(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("f0,f1\n1.0,oops\n")
    with pytest.raises(DataError, match="line 2.*'oops' in column 'f1'"):
        ingest_csv(path)


def test_ingest_feature_count_check(tmp_path):
    path = tmp_path / "d.csv"
    write_data_csv(path, np.zeros((2, 3), np.float32))
    with pytest.raises(DataError, match="has 3 feature columns, expected 5"):
        ingest_csv(path, expected_features=5)


def test_ingest_empty_file(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DataError, match="empty file"):
        ingest_csv(path)


def test_ingest_label_column_any_position(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("label,f0\n1,0.5\n0,0.25\n")
    X, labels = ingest_csv(path)
    assert X.shape == (2, 1)
    assert labels.tolist() == [1.0, 0.0]
