from __future__ import annotations

import csv
import io
import json

import pytest

from conftest import cycle
from corefactor.cli import dispatch
from corefactor.graph import gnp_random, read_edgelist, write_edgelist
from corefactor.thresholds import compute_ck


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = dispatch(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def c4_file(tmp_path):
    p = tmp_path / "c4.txt"
    write_edgelist(cycle(4), p)
    return str(p)


def test_gen_matches_library(tmp_path):
    code, out, _ = run("gen", "--n", "200", "--c", "3.5", "--seed", "9")
    assert code == 0
    assert read_edgelist(io.StringIO(out)) == gnp_random(200, 3.5, 9)
    p = tmp_path / "g.txt"
    assert run("gen", "--n", "200", "--c", "3.5", "--seed", "9", "--out", str(p))[0] == 0
    assert p.read_text() == out


def test_core(tmp_path):
    p = tmp_path / "g.txt"
    write_edgelist(gnp_random(2000, 8.0, 3), p)
    code, out, _ = run("core", "--in", str(p), "--k", "4", "--out", str(tmp_path / "core.txt"))
    assert code == 0
    d = json.loads(out)
    assert d["core_size"] == len(d["kept"]) == sum(d["degree_hist"].values())
    assert read_edgelist(tmp_path / "core.txt").n == d["core_size"]


def test_factor_c4(c4_file):
    code, out, _ = run("factor", "--in", c4_file, "--k", "2")
    assert code == 0
    assert json.loads(out) == {"kind": "factor", "k": 2, "edges": [0, 1, 2, 3]}


def test_factor_sampled(tmp_path):
    p = tmp_path / "k5.txt"
    p.write_text("5 10\n" + "".join(f"{a} {b}\n" for a in range(5) for b in range(a + 1, 5)))
    code, out, _ = run("factor", "--in", str(p), "--k", "1", "--critical", "sampled:3", "--seed", "2")
    d = json.loads(out)
    assert code == 0 and d["kind"] == "critical" and d["sampled"] is True
    assert len(d["per_deleted_vertex"]) == 3


def test_factor_missing_file_is_domain_error(tmp_path):
    code, out, err = run("factor", "--in", str(tmp_path / "nope.txt"), "--k", "2")
    assert code == 1 and out == ""
    assert json.loads(err)["error"] == "FileNotFoundError"


def test_factor_self_loop_is_domain_error(tmp_path):
    p = tmp_path / "loop.txt"
    p.write_text("2 2\n0 0\n0 1\n")
    code, _, err = run("factor", "--in", str(p), "--k", "1")
    assert code == 1 and json.loads(err)["error"] == "GadgetError"


@pytest.mark.parametrize("argv", [
    ("factor", "--k", "2"),
    ("factor", "--in", "x", "--k", "2", "--critical", "sampled:0"),
    ("thresholds", "--k", "6..3"),
    ("sweep", "--n", "10", "--k", "3", "--grid", "1:2"),
    ("bisect", "--n", "10", "--k", "3", "--c-lo", "1", "--c-hi", "2", "--target", "factor:x"),
    ("nosuch",),
    ("gen", "--n", "5", "--c", "1", "--bogus", "1"),
])
def test_usage_errors_exit_2(argv, capsys):
    code, _, _ = run(*argv)
    assert code == 2


def test_thresholds_csv():
    code, out, _ = run("thresholds", "--k", "3..6")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["k"]) for r in rows] == [3, 4, 5, 6]
    assert list(rows[0]) == ["k", "lambda_k", "c_k", "ck_asymptotic", "residual"]
    assert float(rows[0]["c_k"]) == compute_ck(3).c_k
    assert rows[0]["ck_asymptotic"] == ""
    code, out, _ = run("thresholds", "--k", "10")
    row = next(csv.DictReader(io.StringIO(out)))
    assert float(row["residual"]) == pytest.approx(float(row["c_k"]) - float(row["ck_asymptotic"]))


def test_predict_json():
    code, out, _ = run("predict", "--k", "5", "--c", "9")
    d = json.loads(out)
    assert code == 0 and set(d) == {"k", "c", "mu", "core_fraction", "degree_pmf"}
    assert 7 < d["mu"] < 9


def test_predict_below_threshold_is_domain_error():
    code, _, err = run("predict", "--k", "5", "--c", "3")
    assert code == 1 and json.loads(err)["error"] == "ValueError"


def test_sweep_writes_layout(tmp_path):
    out_dir = tmp_path / "run"
    code, out, _ = run("sweep", "--n", "1000", "--k", "4", "--factor-k", "3",
                       "--grid", "5.0:6.0:0.5", "--trials", "2", "--seed", "1", "--out", str(out_dir))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["c"]) for r in rows] == [5.0, 5.5, 6.0]
    cfg = json.loads((out_dir / "config.json").read_text())
    assert cfg["grid"] == [5.0, 5.5, 6.0] and cfg["trials"] == 2
    assert len((out_dir / "trials.jsonl").read_text().splitlines()) == 6


def test_threads_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("COREFACTOR_THREADS", "2")
    a = tmp_path / "a"
    assert run("sweep", "--n", "500", "--k", "3", "--grid", "3:4:1", "--trials", "2",
               "--out", str(a))[0] == 0
    monkeypatch.setenv("COREFACTOR_THREADS", "many")
    assert run("sweep", "--n", "500", "--k", "3", "--grid", "3:4:1", "--trials", "1")[0] == 2


def test_bisect_json():
    code, out, _ = run("bisect", "--n", "5000", "--k", "3", "--trials", "4", "--c-lo", "2.5",
                       "--c-hi", "4.5", "--resolution", "0.1")
    d = json.loads(out)
    assert code == 0 and d["c_lo"] < d["estimate"] < d["c_hi"]


def test_bisect_bad_bracket_is_domain_error():
    code, _, err = run("bisect", "--n", "1000", "--k", "3", "--trials", "2", "--c-lo", "1",
                       "--c-hi", "1.5")
    assert code == 1 and "not above" in json.loads(err)["message"]


def test_verify_small_scale():
    code, out, _ = run("verify", "--suite", "small-oracles", "--scale", "0.1", "--seed", "3")
    assert code == 0
    lines = out.splitlines()
    assert len(lines) == 5 and all(x.startswith("PASS") for x in lines)
