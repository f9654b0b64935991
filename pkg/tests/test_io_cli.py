import json

import numpy as np
import pytest

from proxnmf.cli import main
from proxnmf.errors import InvalidInput
from proxnmf.io import (read_anchors, read_json, read_matrix_csv, write_anchors,
                        write_json, write_matrix_csv)


def _files(d, names):
    return {name: (d / name).read_bytes() for name in names}


class TestCsv:
    def test_round_trip_bitwise(self, tmp_path):
        rng = np.random.default_rng(0)
        M = rng.random((7, 5)) * 10.0 ** rng.integers(-12, 12, size=(7, 5))
        M[0, 0] = 0.1 + 0.2
        write_matrix_csv(tmp_path / "m.csv", M)
        back = read_matrix_csv(tmp_path / "m.csv")
        assert np.array_equal(back.view(np.uint64), M.view(np.uint64))

    def test_lf_no_header(self, tmp_path):
        write_matrix_csv(tmp_path / "m.csv", np.eye(2))
        assert (tmp_path / "m.csv").read_bytes() == b"1,0\n0,1\n"

    def test_ragged(self, tmp_path):
        (tmp_path / "bad.csv").write_text("1,2\n3\n")
        with pytest.raises(InvalidInput):
            read_matrix_csv(tmp_path / "bad.csv")

    def test_unparsable(self, tmp_path):
        (tmp_path / "bad.csv").write_text("1,x\n")
        with pytest.raises(InvalidInput):
            read_matrix_csv(tmp_path / "bad.csv")

    def test_empty(self, tmp_path):
        (tmp_path / "e.csv").write_text("\n")
        with pytest.raises(InvalidInput):
            read_matrix_csv(tmp_path / "e.csv")

    def test_anchors_and_json(self, tmp_path):
        write_anchors(tmp_path / "a.txt", [0, 4])
        assert (tmp_path / "a.txt").read_text() == "1\n5\n"
        assert read_anchors(tmp_path / "a.txt").tolist() == [0, 4]
        write_json(tmp_path / "j.json", {"b": 1, "a": [1.5]})
        assert read_json(tmp_path / "j.json") == {"a": [1.5], "b": 1}
        assert (tmp_path / "j.json").read_text().startswith('{\n  "a"')


@pytest.fixture
def identity_csv(tmp_path):
    write_matrix_csv(tmp_path / "I.csv", np.eye(3))
    return tmp_path / "I.csv"


@pytest.fixture(scope="module")
def c1_run(tmp_path_factory):
    d = tmp_path_factory.mktemp("c1")
    assert main(["generate", "--m", "100", "--n", "75", "--r", "25",
                 "--seed", "4", "--out", str(d / "inst")]) == 0
    assert main(["factorize", str(d / "inst" / "X.csv"), "--meta", str(d / "inst" / "meta.json"),
                 "--out", str(d / "run")]) == 0
    return d


class TestGenerate:
    def test_rerun_identical(self, tmp_path):
        args = ["generate", "--m", "25", "--n", "100", "--r", "15", "--seed", "2"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        names = ["X.csv", "meta.json"]
        assert _files(tmp_path / "a", names) == _files(tmp_path / "b", names)
        meta = read_json(tmp_path / "a" / "meta.json")
        assert meta["regime"] == "c2" and meta["true_anchors"] == list(range(1, 16))

    def test_no_regime_exit_2(self, tmp_path, capsys):
        assert main(["generate", "--m", "5", "--n", "10", "--r", "12",
                     "--out", str(tmp_path)]) == 2
        assert "NoRegime" in capsys.readouterr().err

    def test_ambiguous_needs_regime(self, tmp_path):
        base = ["generate", "--m", "10", "--n", "20", "--r", "10", "--out"]
        assert main(base + [str(tmp_path / "a")]) == 2
        assert main(base + [str(tmp_path / "b"), "--regime", "c3"]) == 0

    def test_declared_mismatch(self, tmp_path):
        assert main(["generate", "--m", "25", "--n", "100", "--r", "45", "--regime", "c2",
                     "--out", str(tmp_path)]) == 2


class TestFactorize:
    def test_identity(self, identity_csv, tmp_path):
        out = tmp_path / "run"
        assert main(["factorize", str(identity_csv), "--out", str(out)]) == 0
        assert (out / "anchors.txt").read_text() == "1\n2\n3\n"
        np.testing.assert_allclose(read_matrix_csv(out / "W.csv"), np.eye(3), atol=1e-9)
        rep = read_json(out / "report.json")
        assert rep["converged"] and rep["anchors_found"] == [1, 2, 3]
        assert "wall_time_ms" in read_json(out / "timing.json")
        assert "wall_time_ms" not in json.dumps(rep)

    def test_max_iters_exit_3(self, identity_csv, tmp_path):
        out = tmp_path / "run"
        assert main(["factorize", str(identity_csv), "--max-iters", "1", "--out", str(out)]) == 3
        assert read_json(out / "report.json")["converged"] is False

    def test_negative_entry_exit_2(self, tmp_path):
        write_matrix_csv(tmp_path / "n.csv", [[1.0, -1.0], [1.0, 2.0]])
        assert main(["factorize", str(tmp_path / "n.csv"), "--out", str(tmp_path / "o")]) == 2

    def test_malformed_exit_2(self, tmp_path):
        (tmp_path / "bad.csv").write_text("1,2\n3\n")
        assert main(["factorize", str(tmp_path / "bad.csv"), "--out", str(tmp_path / "o")]) == 2

    def test_zero_column_exit_2(self, tmp_path):
        write_matrix_csv(tmp_path / "z.csv", [[1.0, 0.0], [1.0, 0.0]])
        assert main(["factorize", str(tmp_path / "z.csv"), "--out", str(tmp_path / "o")]) == 2

    def test_duplicates_mapped_back(self, tmp_path):
        X = np.array([[1.0, 0.0, 0.5, 2.0], [0.0, 1.0, 0.5, 0.0]])
        write_matrix_csv(tmp_path / "d.csv", X)
        out = tmp_path / "o"
        assert main(["factorize", str(tmp_path / "d.csv"), "--out", str(out)]) == 0
        rep = read_json(out / "report.json")
        assert rep["anchors_found"] == [1, 2]
        assert rep["duplicates"] == {"4": 1}
        W = read_matrix_csv(out / "W.csv")
        np.testing.assert_allclose(X[:, [0, 1]] @ W, X, atol=1e-9)

    def test_ground_truth(self, c1_run):
        rep = read_json(c1_run / "run" / "report.json")
        assert rep["accuracy"] == [25, 25] and rep["false_positives"] == 0

    def test_shuffle_invariant(self, tmp_path):
        base = ["generate", "--m", "25", "--n", "100", "--r", "45", "--seed", "1"]
        assert main(base + ["--out", str(tmp_path / "p")]) == 0
        assert main(base + ["--shuffle", "--out", str(tmp_path / "s")]) == 0
        for name in ("p", "s"):
            assert main(["factorize", str(tmp_path / name / "X.csv"),
                         "--meta", str(tmp_path / name / "meta.json"),
                         "--out", str(tmp_path / name / "run")]) == 0
        Xp = read_matrix_csv(tmp_path / "p" / "X.csv")
        Xs = read_matrix_csv(tmp_path / "s" / "X.csv")
        ap = read_anchors(tmp_path / "p" / "run" / "anchors.txt")
        as_ = read_anchors(tmp_path / "s" / "run" / "anchors.txt")
        assert sorted(map(tuple, Xp[:, ap].T)) == sorted(map(tuple, Xs[:, as_].T))
        assert read_json(tmp_path / "s" / "run" / "report.json")["accuracy"] == [45, 45]


class TestVerify:
    def test_pass(self, c1_run, capsys):
        code = main(["verify", str(c1_run / "inst" / "X.csv"), str(c1_run / "run" / "report.json"),
                     "--meta", str(c1_run / "inst" / "meta.json")])
        out = capsys.readouterr().out
        assert code == 0, out
        for name in ("weights-shape", "phi2", "reconstruction", "oracle", "ground-truth"):
            assert f"PASS  {name}" in out

    def test_corrupted_anchor_fails(self, c1_run, tmp_path, capsys):
        rep = read_json(c1_run / "run" / "report.json")
        rep["anchors_found"][0] = 30
        write_json(tmp_path / "report.json", rep)
        code = main(["verify", str(c1_run / "inst" / "X.csv"), str(tmp_path / "report.json"),
                     "--weights", str(c1_run / "run" / "W.csv")])
        out = capsys.readouterr().out
        assert code == 1
        assert "FAIL  oracle" in out

    def test_oracle_skipped_over_limit(self, c1_run, capsys):
        code = main(["verify", str(c1_run / "inst" / "X.csv"), str(c1_run / "run" / "report.json"),
                     "--oracle-max-n", "50"])
        out = capsys.readouterr().out
        assert code == 0
        assert "SKIP  oracle" in out

    def test_missing_report_exit_2(self, identity_csv, tmp_path):
        assert main(["verify", str(identity_csv), str(tmp_path / "nope.json")]) == 2


class TestBenchCommand:
    def test_writes_outputs(self, tmp_path, capsys):
        assert main(["bench", "--rows", "rsweep-2", "--seeds", "1", "--out", str(tmp_path)]) == 0
        assert "rsweep-2" in capsys.readouterr().out
        res = read_json(tmp_path / "bench.json")
        assert res["rows"][0]["worst_found"] == 2
        assert (tmp_path / "bench.txt").exists()

    def test_unknown_row_exit_2(self):
        assert main(["bench", "--rows", "nope"]) == 2
