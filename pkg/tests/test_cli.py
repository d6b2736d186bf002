from __future__ import annotations

import json
import multiprocessing
import os
import queue

import pandas as pd
import pytest
from pysat.formula import CNF

import lhom_toolkit
from conftest import w
from lib.formats import read_certificate, read_list_instance, write_bcsp, write_cnf, write_graph, write_list_instance
from lib.graphs import crown_graph, cycle_graph, path_graph
from lib.instances import BcspInstance, ListInstance
from lib.layouts import FeedbackSet
from lib.solvers import SolveResult
from seed_random_corpus import build_corpus


@pytest.fixture
def c6_file(tmp_path):
    path = tmp_path / "c6.txt"
    write_graph(cycle_graph(6), path)
    return path


def _instance_file(tmp_path, c6_file, lists):
    h = cycle_graph(6)
    inst = ListInstance.build(path_graph(2), h, {v: w(h, *labels) for v, labels in lists.items()})
    path = tmp_path / "inst.txt"
    write_list_instance(inst, path, c6_file)
    return path


def _bcsp_file(tmp_path):
    b = BcspInstance.build(["a", "b", "c"], [[1, 2], [1, 2], [1, 2]], [(0, 1, [(1, 2), (2, 1)]), (1, 2, [(1, 2), (2, 1)])])
    path = tmp_path / "chain.bcsp.json"
    write_bcsp(b, path)
    return path


# ---------- solve ----------

def test_solve_list_instance(tmp_path, c6_file, capsys):
    path = _instance_file(tmp_path, c6_file, {0: ["w1"], 1: ["w2", "w4"]})
    assert lhom_toolkit.main(["solve", str(path), "--engine", "repset"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "SAT" and len(out) == 3


def test_solve_decide_exits_one_on_unsat(tmp_path, c6_file, capsys):
    path = _instance_file(tmp_path, c6_file, {0: ["w1"], 1: ["w3"]})
    assert lhom_toolkit.main(["solve", str(path), "--decide"]) == 1
    assert capsys.readouterr().out.strip() == "UNSAT"
    assert lhom_toolkit.main(["solve", str(path)]) == 0


def test_solve_bcsp_stats_json(tmp_path, capsys):
    path = _bcsp_file(tmp_path)
    assert lhom_toolkit.main(["solve", str(path), "--engine", "repset", "--stats", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["satisfiable"] is True
    assert doc["stats"]["engine"] == "repset"


def test_missing_instance_is_an_input_error(tmp_path, capsys):
    assert lhom_toolkit.main(["solve", str(tmp_path / "nope.txt")]) == 2
    assert "not found" in capsys.readouterr().err


def test_unknown_flag_is_rejected(tmp_path):
    with pytest.raises(SystemExit) as e:
        lhom_toolkit.main(["solve", "x.txt", "--bogus"])
    assert e.value.code == 2


# ---------- invariants / layout ----------

def test_invariants_of_crown(tmp_path, capsys):
    path = tmp_path / "crown.txt"
    write_graph(crown_graph(3), path)
    assert lhom_toolkit.main(["invariants", str(path), "--kind", "all"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["i"]["value"] == 3
    assert doc["gamma"]["value"] == 1
    assert all(doc[k]["verified"] == "ok" for k in ("i", "mim", "gamma"))


def test_layout_of_cycle(tmp_path, c6_file, capsys):
    cert = tmp_path / "fvs.json"
    assert lhom_toolkit.main(["layout", str(c6_file), "--fvs", "--cert", str(cert)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["width"] == 2
    assert len(doc["fvs"]) == 1
    assert isinstance(read_certificate(cert, cycle_graph(6)), FeedbackSet)


# ---------- reduce / verify ----------

def test_reduce_then_verify(tmp_path, c6_file, capsys):
    cnf_path = tmp_path / "f.cnf"
    write_cnf(CNF(from_clauses=[[1, -2], [2]]), cnf_path)
    out, cert, dot = tmp_path / "red.txt", tmp_path / "red.json", tmp_path / "red.dot"
    args = ["reduce", str(cnf_path), "--target", str(c6_file), "--mode", "fvs", "--out", str(out), "--cert", str(cert), "--dot", str(dot)]
    assert lhom_toolkit.main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["certificate"] == "fvs" and doc["fvs_size"] == doc["t"] * doc["p"]
    assert dot.read_text().startswith("graph")
    assert read_list_instance(out).g.n == doc["vertices"]

    assert lhom_toolkit.main(["verify", str(out), "--cert", str(cert), "--engines", "fvs", "--cap", "10000"]) == 0
    assert capsys.readouterr().out.startswith("OK")


def test_reduce_ctw_certificate_verifies(tmp_path, c6_file, capsys):
    out, cert = tmp_path / "red.txt", tmp_path / "red.json"
    args = ["reduce", "--random", "3", "3", "--seed", "5", "--target", str(c6_file), "--mode", "ctw", "--g", "4", "--out", str(out), "--cert", str(cert)]
    assert lhom_toolkit.main(args) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["width"] <= doc["t"] * doc["p"] + doc["width_constant"]
    assert lhom_toolkit.main(["verify", str(out), "--cert", str(cert)]) == 0


def test_reduce_rejects_bad_colours(tmp_path, c6_file, capsys):
    cnf_path = tmp_path / "f.cnf"
    write_cnf(CNF(from_clauses=[[1]]), cnf_path)
    args = ["reduce", str(cnf_path), "--target", str(c6_file), "--colours", "w2,w4", "--out", str(tmp_path / "r.txt")]
    assert lhom_toolkit.main(args) == 2
    assert "error" in capsys.readouterr().err


def test_verify_width_mismatch(tmp_path, c6_file, capsys):
    path = _instance_file(tmp_path, c6_file, {})
    g = read_list_instance(path).g
    cert = tmp_path / "lay.json"
    cert.write_text(json.dumps({"kind": "layout", "order": list(g.labels), "width": 0}))
    assert lhom_toolkit.main(["verify", str(path), "--cert", str(cert)]) == 3
    assert "width mismatch" in capsys.readouterr().out


def test_verify_reports_engine_divergence(tmp_path, monkeypatch, capsys):
    path = _bcsp_file(tmp_path)
    real = lhom_toolkit.run_bcsp

    def faulty(b, engine="brute", layout="exact", fvs=None):
        res = real(b, engine, layout, fvs)
        return SolveResult(False, None, res.stats) if engine == "repset" else res

    monkeypatch.setattr(lhom_toolkit, "run_bcsp", faulty)
    assert lhom_toolkit.main(["verify", str(path), "--engines", "brute,repset"]) == 3
    assert "engine divergence" in capsys.readouterr().out


def test_verify_engines_agree(tmp_path, capsys):
    path = _bcsp_file(tmp_path)
    assert lhom_toolkit.main(["verify", str(path), "--engines", "brute,dp,repset,fvs"]) == 0
    assert capsys.readouterr().out.strip() == "OK instance, engines"


def test_verify_says_when_the_cross_check_is_skipped(tmp_path, capsys):
    path = _bcsp_file(tmp_path)
    assert lhom_toolkit.main(["verify", str(path), "--engines", "brute,repset", "--cap", "2"]) == 0
    assert capsys.readouterr().out.strip() == "OK instance, engines skipped (3 vertices > cap 2)"


# ---------- bench ----------

def test_bench_empty_corpus(tmp_path, capsys):
    assert lhom_toolkit.main(["bench", str(tmp_path)]) == 0
    assert "empty" in capsys.readouterr().out


def test_bench_corpus(tmp_path):
    corpus = tmp_path / "corpus"
    manifest = build_corpus(corpus, 4, 6, 3, 0.3, 0.7, 1, 3, 4, 3, seed=2)
    assert len(manifest) == 5
    csv = tmp_path / "bench.csv"
    assert lhom_toolkit.main(["bench", str(corpus), "--engines", "brute,repset", "--csv", str(csv)]) == 0
    df = pd.read_csv(csv)
    assert len(df) == 4 * 2 + 1
    assert (df["status"] == "ok").all()
    assert "seed" in df.columns
    for _, group in df[df["kind"] == "bcsp"].groupby("file"):
        assert group["satisfiable"].nunique() == 1
    rep = df[(df["engine"] == "repset") & df["table_bound"].notna()]
    assert (rep["max_table"] <= rep["table_bound"]).all()
    assert df[df["kind"] == "cnf"]["agrees"].astype(str).eq("True").all()


def _exit_without_row(path, engine, out):
    os._exit(3)


def test_bench_job_records_unexpected_errors(tmp_path, monkeypatch):
    path = _bcsp_file(tmp_path)

    def broken(b, engine="brute", layout="exact", fvs=None):
        raise KeyError("boom")

    monkeypatch.setattr(lhom_toolkit, "run_bcsp", broken)
    out = queue.Queue()
    lhom_toolkit._bench_job(str(path), "brute", out)
    row = out.get_nowait()
    assert row["status"] == "error"
    assert row["error"].startswith("KeyError")


def test_bench_reports_a_dead_child(tmp_path):
    path = _bcsp_file(tmp_path)
    row = lhom_toolkit._bench_one(multiprocessing.get_context(), path, "brute", 30, job=_exit_without_row)
    assert row["status"] == "crashed"
    assert row["error"] == "exit code 3"


def test_corpus_is_reproducible(tmp_path):
    a = build_corpus(tmp_path / "a", 3, 5, 3, 0.2, 0.8, 2, 4, 4, 3, seed=9)
    b = build_corpus(tmp_path / "b", 3, 5, 3, 0.2, 0.8, 2, 4, 4, 3, seed=9)
    pd.testing.assert_frame_equal(a, b)
    for name in a["file"]:
        assert (tmp_path / "a" / name).read_text() == (tmp_path / "b" / name).read_text()

