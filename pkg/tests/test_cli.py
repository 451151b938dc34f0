import numpy as np
import pytest

from rpup import cli
from rpup.decimation import sampling_matrix, stack_window
from rpup.io import read_signal, write_signal
from rpup.paraunitary import ParaunitarySpec, coefficients


def run(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture
def signal(tmp_path, rng):
    p = tmp_path / "x.bin"
    x = rng.standard_normal((12, 8))
    write_signal(p, x, 8)
    return p, x


def test_unitary_round_trip(tmp_path, signal):
    p, x = signal
    assert run("apply", "unitary", "--m", 8, "--seed", "abc", "--in", p, "--out", tmp_path / "y") == 0
    assert run("apply", "unitary-inverse", "--m", 8, "--seed", "abc",
               "--in", tmp_path / "y", "--out", tmp_path / "z") == 0
    assert np.abs(read_signal(tmp_path / "z").blocks() - x).max() <= 1e-10


def test_project_full_equals_unitary(tmp_path, signal):
    p, _ = signal
    run("apply", "unitary", "--m", 8, "--seed", "1", "--in", p, "--out", tmp_path / "u")
    run("apply", "project", "--m", 8, "--n", 8, "--seed", "1", "--in", p, "--out", tmp_path / "p")
    a, b = read_signal(tmp_path / "u").samples, read_signal(tmp_path / "p").samples
    assert np.abs(a - b).max() <= 1e-12


def test_project_transpose_shapes(tmp_path, signal):
    p, _ = signal
    assert run("apply", "project", "--m", 8, "--n", 3, "--in", p, "--out", tmp_path / "p") == 0
    sf = read_signal(tmp_path / "p")
    assert sf.block_size == 3 and sf.count == 36
    assert run("apply", "project-transpose", "--m", 8, "--n", 3,
               "--in", tmp_path / "p", "--out", tmp_path / "q") == 0
    assert read_signal(tmp_path / "q").blocks().shape == (12, 8)


def test_paraunitary_round_trip_is_delayed(tmp_path, signal):
    p, x = signal
    K = 2
    run("apply", "paraunitary", "--m", 8, "--k-order", K, "--seed", "5", "--in", p, "--out", tmp_path / "f")
    run("apply", "paraunitary-inverse", "--m", 8, "--k-order", K, "--seed", "5",
        "--in", tmp_path / "f", "--out", tmp_path / "g")
    g = read_signal(tmp_path / "g").blocks()
    assert np.abs(g[K:K + 12] - x).max() <= 1e-10
    assert np.abs(g[:K]).max() <= 1e-12


def test_decimate_and_adjoint_match_dense_oracle(tmp_path, signal):
    p, x = signal
    K = 3
    spec = ParaunitarySpec(8, K, 0x99)
    B = sampling_matrix(coefficients(spec))
    assert run("apply", "decimate", "--m", 8, "--k-order", K, "--seed", "99",
               "--in", p, "--out", tmp_path / "d") == 0
    d = read_signal(tmp_path / "d").blocks()
    want = np.array([B @ stack_window(x[w * 4:(w + 1) * 4]) for w in range(3)])
    assert np.abs(d - want).max() <= 1e-12
    assert run("apply", "adjoint", "--m", 8, "--k-order", K, "--seed", "99",
               "--in", tmp_path / "d", "--out", tmp_path / "a") == 0
    a = read_signal(tmp_path / "a").blocks()
    back = np.concatenate([(B.T @ d[w]).reshape(4, 8)[::-1] for w in range(3)])
    assert np.abs(a - back).max() <= 1e-12


def test_schedule_file(tmp_path, signal):
    p, _ = signal
    sched = tmp_path / "s.csv"
    sched.write_text("window_index,q,blocks\n0,2,4\n2,4,8\n")
    assert run("apply", "decimate", "--m", 8, "--k-order", 3, "--schedule", sched,
               "--in", p, "--out", tmp_path / "d") == 0
    assert read_signal(tmp_path / "d").blocks().shape == (4, 8)
    sched.write_text("0,2,3\n")
    assert run("apply", "decimate", "--m", 8, "--schedule", sched, "--in", p, "--out", tmp_path / "d") == 1


def test_generate(tmp_path):
    assert run("generate", "unitary", "--m", 4, "--seed", "7", "--out", tmp_path / "u") == 0
    U = read_signal(tmp_path / "u").blocks()
    np.testing.assert_allclose(U @ U.T, np.eye(4), atol=1e-12)
    assert run("generate", "sampling", "--m", 4, "--k-order", 2, "--out", tmp_path / "b") == 0
    assert read_signal(tmp_path / "b").blocks().shape == (4, 12)
    assert run("generate", "coefficients", "--m", 4, "--k-order", 2, "--out", tmp_path / "c") == 0
    assert read_signal(tmp_path / "c").count == 48
    assert run("generate", "projection", "--m", 6, "--n", 2, "--out", tmp_path / "p") == 0
    assert run("generate", "signal", "--m", 4, "--blocks", 3, "--out", tmp_path / "s") == 0
    assert read_signal(tmp_path / "s").count == 12


def test_errors(tmp_path, signal, capsys):
    p, _ = signal
    assert run("apply", "unitary", "--m", 6, "--in", p) == 1
    assert "block size" in capsys.readouterr().err
    raw = tmp_path / "raw.bin"
    write_signal(raw, np.zeros(10))
    assert run("apply", "unitary", "--m", 4, "--in", raw) == 1
    assert "element count" in capsys.readouterr().err
    assert run("apply", "unitary", "--m", 8, "--in", tmp_path / "missing") == 2
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"not a signal file at all")
    assert run("apply", "unitary", "--m", 8, "--in", bad) == 2
    assert "malformed" in capsys.readouterr().err
    assert run("apply", "paraunitary", "--m", 7, "--in", p) == 1
    assert run("apply", "project", "--m", 8, "--n", 9, "--in", p) == 1
    assert run("apply", "unitary", "--seed", "nothex", "--in", p) == 1
    assert run("apply", "unitary", "--m", 8) == 1
    assert run("frobnicate") == 1
    assert run("apply", "unitary", "--m", 8, "--in", p, "--out", tmp_path / "no" / "dir") == 2


def test_stats_degenerate_trials(capsys):
    assert run("stats", "--trials", 1) == 1
    assert "degenerate" in capsys.readouterr().err


def test_stats_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("stats", "--trials", 40, "--seed", "1", "--out", a) in (0, 1)
    run("stats", "--trials", 40, "--seed", "1", "--out", b)
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "test,statistic,threshold,pass"


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    assert run("bench", "--m", 8, "--k-order", 4, "--blocks", 40, "--out", out) == 0
    rows = [line.split(",") for line in out.read_text().splitlines()]
    assert tuple(rows[0]) == cli.BENCH_COLUMNS
    by_q = {int(r[0]): dict(zip(rows[0], r)) for r in rows[1:]}
    assert set(by_q) == {1, 2, 5}
    assert float(by_q[1]["stage_ratio"]) == 1.0
    assert float(by_q[5]["claimed_ratio"]) == 3.875
    assert by_q[1]["claimed_ratio"] == ""


def test_cs_demo(tmp_path):
    out = tmp_path / "cs.csv"
    assert run("cs-demo", "--m", 8, "--k-order", 1, "--sparsity", "0-1", "--trials", 3, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "M,K,sparsity,trials,exact,rate"
    assert lines[1] == "8,1,0,3,3,1.0"
    assert run("cs-demo", "--m", 8, "--k-order", 1, "--sparsity", "8", "--trials", 1) == 1
