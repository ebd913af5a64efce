import json

import pytest

from qillum.cli import main


def run(args):
    return main(args)


def test_sweep_minimal_grid(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sweep", "--ns-count", "2", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    rows = [l for l in lines if not l.startswith("#") and not l.startswith("n_s,")]
    assert len(rows) == 2 * 3  # two grid points, three default states
    assert lines[-1].count(",") == 5


def test_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--ns-count", "4", "--state", "tmsv", "--state", "coherent"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_config_roundtrip(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", "--ns-count", "3", "--kappa", "0.02",
                "--out", str(a)]) == 0
    # the header comments of the output are a complete config
    assert run(["sweep", "--config", str(a), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_flags_override_config(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sweep", "--ns-count", "2", "--kappa", "0.02", "--out", str(a)]) == 0
    assert run(["sweep", "--config", str(a), "--kappa", "0.05", "--out", str(b)]) == 0
    assert "# kappa=0.05" in b.read_text()


def test_sweep_workers_do_not_change_output(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    argv = ["sweep", "--ns-count", "3", "--state", "tmsv"]
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--workers", "2", "--out", str(b)]) == 0
    a_body = [l for l in a.read_text().splitlines() if not l.startswith("#")]
    b_body = [l for l in b.read_text().splitlines() if not l.startswith("#")]
    assert a_body == b_body


def test_sweep_rejects_bad_grid(tmp_path):
    assert run(["sweep", "--ns-count", "1", "--out", str(tmp_path / "x.csv")]) == 2
    assert run(["sweep", "--ns-min", "2.0", "--ns-max", "1.0",
                "--out", str(tmp_path / "x.csv")]) == 2


def test_ratio_identical_pair(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["ratio", "--pair", "tmsv/tmsv", "--ns-count", "2",
                "--out", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines()
            if not l.startswith(("#", "n_s"))]
    for row in rows:
        assert float(row.split(",")[2]) == pytest.approx(1.0, rel=1e-12)


def test_ratio_default_pairs(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["ratio", "--ns-count", "2", "--out", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines()
            if not l.startswith(("#", "n_s"))]
    assert len(rows) == 2 * 3


def test_crossover_found(tmp_path):
    rep = tmp_path / "c.json"
    code = run(["crossover", "tmsv", "coherent", "--ns-max", "0.1",
                "--out", str(rep)])
    assert code == 0
    data = json.loads(rep.read_text())
    assert data["found"] is True
    assert data["n_s"] == pytest.approx(0.00167, rel=0.02)


def test_crossover_not_found(tmp_path):
    rep = tmp_path / "c.json"
    code = run(["crossover", "tmsv", "tmsv", "--ns-max", "0.1",
                "--out", str(rep)])
    assert code == 3
    assert json.loads(rep.read_text())["found"] is False


def test_optimize(tmp_path):
    rep = tmp_path / "o.json"
    assert run(["optimize", "--ns", "1.0", "--out", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["alpha_sq"] == pytest.approx(0.91833, abs=1e-3)
    assert data["flat"] is False


def test_check_quick(tmp_path, capsys):
    rep = tmp_path / "chk.json"
    assert run(["check", "--quick", "--out", str(rep)]) == 0
    results = json.loads(rep.read_text())
    assert all(r["passed"] for r in results)
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
