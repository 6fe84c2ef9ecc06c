import json

import numpy as np
import pytest

from mixsde import GridPath, read_csv, write_csv
from mixsde.cli import run


def out_json(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_selftest(capsys):
    assert run(["selftest"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "all passed" in out


def test_paths_byte_identical(tmp_path):
    args = ["paths", "--kind", "fbm", "--H", "0.7", "--n", "1024", "--T", "1", "--seed", "7"]
    assert run(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert run(args + ["--out", str(tmp_path / "b.csv")]) == 0
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    assert a.startswith(b"t,value\n0,0\n")
    assert read_csv(tmp_path / "a.csv").n == 1024


def test_integrate_fixture(tmp_path, capsys):
    s = GridPath.from_function(lambda t: t, 2048, 1.0)
    write_csv(s, tmp_path / "f.csv")
    write_csv(s.with_values(s.values**2), tmp_path / "g.csv")
    assert run(["integrate", "--f", str(tmp_path / "f.csv"), "--g", str(tmp_path / "g.csv"),
                "--alpha", "0.3", "--check-bound"]) == 0
    res = out_json(capsys)
    assert res["integral"] == pytest.approx(2 / 3, abs=1e-3)
    assert res["bound"] >= res["integral"]
    assert res["alpha"] == 0.3


def test_norms(tmp_path, capsys):
    write_csv(GridPath.from_function(lambda t: t, 2048, 1.0), tmp_path / "s.csv")
    assert run(["norms", "--in", str(tmp_path / "s.csv"), "--alpha", "0.4", "--which", "0alpha"]) == 0
    assert out_json(capsys)["value"] == pytest.approx(3.5, rel=1e-3)
    assert run(["norms", "--in", str(tmp_path / "s.csv"), "--alpha", "0.3", "--gamma", "0.7",
                "--which", "alpha"]) == 2


def test_mollify_fit(tmp_path, capsys):
    run(["paths", "--kind", "fbm", "--H", "0.7", "--n", "512", "--seed", "1", "--out", str(tmp_path / "z.csv")])
    eps = [x for k in range(3, 7) for x in ("--eps", str(2.0**-k))]
    assert run(["mollify", "--in", str(tmp_path / "z.csv"), "--alpha", "0.35", "--fit",
                "--out", str(tmp_path / "e.csv")] + eps) == 0
    assert "slope" in out_json(capsys)
    rows = (tmp_path / "e.csv").read_text().splitlines()
    assert rows[0] == "eps,error" and len(rows) == 5


def test_solve_and_failures(tmp_path):
    coeffs = json.dumps({"a": {"kind": "linear", "scale": 0.1}, "c": {"kind": "sine"}})
    assert run(["solve", "--coeffs", coeffs, "--x0", "1", "--n", "256", "--H", "0.7",
                "--out", str(tmp_path / "x.csv")]) == 0
    assert (tmp_path / "x.csv").read_text().startswith("t,x\n0,1\n")
    assert run(["solve", "--coeffs", coeffs, "--x0", "1", "--n", "256", "--H", "0.7", "--mollify-eps", "0.0625",
                "--out", str(tmp_path / "xs.csv")]) == 0
    blow = json.dumps({"a": {"kind": "linear", "scale": 500.0}})
    assert run(["solve", "--coeffs", blow, "--x0", "1", "--n", "256", "--H", "0.7",
                "--out", str(tmp_path / "y.csv")]) == 1
    assert run(["solve", "--coeffs", '{"a": {"kind": "cubic"}}', "--x0", "1", "--n", "256", "--H", "0.7",
                "--out", str(tmp_path / "y.csv")]) == 2


def test_usage_errors(capsys):
    assert run(["bogus"]) == 2
    assert run([]) == 2
    assert run(["paths", "--kind", "fbm", "--H", "1.5", "--n", "8", "--seed", "0", "--out", "/tmp/never.csv"]) == 2
    assert run(["norms", "--in", "/nonexistent.csv", "--alpha", "0.3", "--which", "alpha"]) == 2


def test_experiment_subcommand(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"n": 128, "M": 50, "eps_levels": [0.25, 0.125]}))
    for d in ("r1", "r2"):
        assert run(["converge", "--config", str(cfg), "--out-dir", str(tmp_path / d)]) == 0
    for name in ("records.csv", "summary.json", "plotdata.csv"):
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes()
    assert run(["converge", "--config", '{"n": 128, "M": 5}', "--out-dir", str(tmp_path / "r3")]) == 2
