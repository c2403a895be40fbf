import subprocess
import sys

import numpy as np
import pytest

from htica.cli import main
from htica.harness import parse_csv
from htica.io import read_matrix, read_samples, write_samples


@pytest.fixture
def sample_files(tmp_path):
    x, a = tmp_path / "x.txt", tmp_path / "A.txt"
    assert main(["gen", "--eta", "6,6,2.5", "--N", "2000", "--seed", "4",
                 "--out", str(x), "--mixing-out", str(a)]) == 0
    return x, a


def test_gen(sample_files):
    X, header = read_samples(sample_files[0])
    assert X.shape == (2000, 3) and header["seed"] == 4
    A, h = read_matrix(sample_files[1])
    np.testing.assert_allclose(np.linalg.norm(A, axis=0), 1.0)


def test_gen_is_deterministic(tmp_path):
    for name in ("a.txt", "b.txt"):
        main(["gen", "--eta", "3", "--n", "2", "--N", "50", "--seed", "1", "--out", str(tmp_path / name)])
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_orth_and_eval(sample_files, tmp_path, capsys):
    x, a = sample_files
    assert main(["orth", str(x), "--method", "covariance", "--out", str(tmp_path / "B.txt")]) == 0
    assert (tmp_path / "B.txt").read_text().startswith("# method=covariance")
    assert main(["orth", str(x), "--method", "oracle", "--truth", str(a)]) == 0
    assert main(["eval", str(a), str(a)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-2] == "frob,amari,permutation,signs"
    frob, amari, perm, signs = out[-1].split(",")
    assert float(frob) == 0.0 and float(amari) == pytest.approx(0.0, abs=1e-12)
    assert (perm, signs) == ("0 1 2", "+ + +")


def test_damp(sample_files, tmp_path, capsys):
    assert main(["damp", str(sample_files[0]), "--seed", "2", "--out", str(tmp_path / "y.txt")]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "R,acceptance_rate,K_estimate"
    R, rate, K = map(float, lines[1].split(","))
    assert K == pytest.approx(0.75, abs=0.01)
    assert read_samples(tmp_path / "y.txt")[0].shape[0] == round(rate * 2000)


def test_run(sample_files, tmp_path, capsys):
    x, a = sample_files
    code = main(["run", str(x), "--method", "centroid", "--body-size", "300", "--seed", "1",
                 "--truth", str(a), "--out", str(tmp_path / "Ahat.txt")])
    assert code == 0
    assert "frob=" in capsys.readouterr().out
    _, header = read_matrix(tmp_path / "Ahat.txt")
    assert header["contrast"] == "pow3"


def test_sweep_reproducible(tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("eta = 6, 6\nN_grid = 100, 200\ntrials = 2\n"
                   "pipelines = oracle/pow3/raw, centroid/tanh/damped\n")
    outs = []
    for name in ("a.csv", "b.csv"):
        assert main(["sweep", "--config", str(cfg), "--seed", "9", "--out", str(tmp_path / name),
                     "--plot-dir", str(tmp_path / "plots")]) == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    assert len(parse_csv(tmp_path / "a.csv")) == 8
    assert (tmp_path / "plots" / "oracle_pow3_raw.dat").exists()


def test_sweep_needs_seed(tmp_path, capsys):
    assert main(["sweep", "--eta", "6,6", "--N-grid", "100"]) == 1
    assert "--seed" in capsys.readouterr().err


def test_usage_errors(tmp_path):
    assert main([]) == 1
    assert main(["frobnicate"]) == 1
    assert main(["orth", str(tmp_path / "missing.txt")]) == 1
    assert main(["sweep", "--seed", "1", "--eta", "6,6", "--N-grid", "200,100"]) == 1


def test_numerical_failure_exit_code(tmp_path):
    x = tmp_path / "flat.txt"
    g = np.random.default_rng(0).standard_normal((20, 1))
    write_samples(x, np.hstack([g, 2 * g]))
    assert main(["orth", str(x), "--method", "covariance"]) == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "htica", "gen", "--eta", "6", "--N", "5",
                          "--seed", "1", "--out", str(tmp_path / "x.txt")], capture_output=True)
    assert out.returncode == 0
    bad = subprocess.run([sys.executable, "-m", "htica", "gen"], capture_output=True)
    assert bad.returncode == 1
