import json

import pytest

from robust_spca.bench import read_csv
from robust_spca.cli import cli_main

SUBCOMMANDS = ("gen", "solve", "bench", "plot", "moments", "lowdeg")


def test_help_exits_zero(capsys):
    assert cli_main(["--help"]) == 0
    for sub in SUBCOMMANDS:
        assert cli_main([sub, "--help"]) == 0
    assert "lowdeg" in capsys.readouterr().out


def test_usage_errors_exit_two(capsys):
    assert cli_main(["frobnicate"]) == 2
    assert cli_main(["moments", "--lam", "1", "--delta", "0.1", "--bogus"]) == 2
    assert cli_main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_runtime_error_exit_one(tmp_path, capsys):
    assert cli_main(["solve", "--input", str(tmp_path / "missing"), "--algo", "dt"]) == 1
    assert cli_main(["moments", "--lam", "6", "--delta", "0.01", "--s", "4"]) == 1
    err = capsys.readouterr().err
    assert "error" in err and "Hankel" in err


def test_gen_and_solve(tmp_path, capsys):
    inst = tmp_path / "i.spca"
    assert cli_main(["gen", "--n", "40", "--d", "60", "--k", "4", "--beta", "30", "--seed", "2", "--out", str(inst)]) == 0
    meta = json.loads(capsys.readouterr().out)
    assert meta["k"] == 4 and meta["truth"]
    for algo in ("dt", "ct", "svd", "svd4", "sdp"):
        out = tmp_path / f"{algo}.csv"
        assert cli_main(["solve", "--input", str(inst), "--algo", algo, "--out", str(out)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["corr2"] > 0.9
        assert out.read_text().startswith("index,value\n0,")
    small = tmp_path / "p.spca"
    cli_main(["gen", "--n", "8", "--d", "6", "--k", "3", "--beta", "5", "--out", str(small)])
    capsys.readouterr()
    assert cli_main(["solve", "--input", str(small), "--algo", "poly", "--b", "1", "--l", "2", "--colorings", "30"]) == 0
    assert json.loads(capsys.readouterr().out)["algo"] == "poly"


def test_gen_subspace_and_adversaries(tmp_path, capsys):
    assert cli_main(["gen", "--form", "subspace", "--n", "10", "--d", "300", "--lam", "3",
                     "--delta", "0.05", "--s", "2", "--out", str(tmp_path / "s.spca")]) == 0
    assert json.loads(capsys.readouterr().out)["form"] == "subspace"
    assert cli_main(["gen", "--n", "10", "--d", "30", "--k", "3", "--beta", "1", "--adversary", "ct",
                     "--b", "1", "--r", "2", "--out", str(tmp_path / "c.spca")]) == 0
    assert cli_main(["gen", "--form", "subspace", "--n", "10", "--d", "30", "--out", str(tmp_path / "x")]) == 1


def test_bench_config_and_plot(tmp_path, capsys):
    cfg = {
        "name": "mini", "form": "wishart", "trials": 2, "x": "beta",
        "grid": {"n": [20], "d": [30], "k": [3], "beta": [1.0, 8.0]},
        "algorithms": ["dt", "svd"],
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "out"
    assert cli_main(["bench", "--config", str(path), "--out-dir", str(out), "--threads", "1", "--no-timing"]) == 0
    recs = read_csv(out / "mini.csv")
    assert len(recs) == 8 and all(r.runtime_ms == 0 for r in recs)
    assert (out / "mini.svg").read_text().startswith("<svg")
    assert cli_main(["plot", "--csv", str(out / "mini.csv"), "--x", "beta", "--out", str(tmp_path / "p.svg")]) == 0
    path.write_text(json.dumps({**cfg, "typo": 1}))
    assert cli_main(["bench", "--config", str(path)]) == 1
    assert cli_main(["bench", "--preset", "nope"]) == 1


def test_bench_preset(tmp_path, capsys):
    assert cli_main(["bench", "--preset", "fig1b", "--trials", "1", "--out-dir", str(tmp_path), "--threads", "1"]) == 0
    assert len(read_csv(tmp_path / "fig1b.csv")) == 6 * 3
    assert (tmp_path / "fig1b.svg").exists()


def test_moments_output(capsys):
    assert cli_main(["moments", "--lam", "3", "--delta", "0.01", "--s", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("# s=4 lambda=3 delta=0.01")
    assert lines[2] == "location,weight"
    rows = [tuple(map(float, ln.split(","))) for ln in lines[3:]]
    assert sum(w for _, w in rows) == pytest.approx(1, abs=1e-10)
    assert sum(w * x * x for x, w in rows) == pytest.approx(0.91 / 0.99, abs=1e-9)


def test_lowdeg_modes(capsys):
    assert cli_main(["lowdeg", "--mode", "bound", "--n", "100", "--d", "1000", "--k", "5", "--beta", "0.01", "--D", "2"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "E_or_alpha,value" and lines[1].startswith("2,0.3977")
    assert cli_main(["lowdeg", "--mode", "exact", "--n", "2", "--d", "2", "--k", "1", "--beta", "0.5", "--D", "4"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "total,0.00390625"
    assert cli_main(["lowdeg", "--mode", "mc", "--n", "2", "--d", "10", "--k", "2", "--beta", "1",
                     "--alpha", "0,0:2", "--samples", "200000"]) == 0
    rows = dict(ln.split(",") for ln in capsys.readouterr().out.splitlines()[1:])
    assert abs(float(rows["0 0:2"]) - 0.05) <= 4 * float(rows["0 0:2 stderr"])
    assert cli_main(["lowdeg", "--mode", "mc", "--n", "2", "--d", "2", "--k", "1", "--beta", "1"]) == 1
    assert cli_main(["lowdeg", "--mode", "mc", "--n", "2", "--d", "2", "--k", "1", "--beta", "1", "--alpha", "x"]) == 1
