from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import sys

import pytest

from quasirand.cli import SWEEP_COLUMNS, _workers, main
from quasirand.graph import sample_gnp
from quasirand.graphio import read_graph, write_graph


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_oracle_min_uk_k2(capsys):
    code, out, _ = run(["oracle", "min-uk", "--n", "5", "--p", "1/2", "--k", "2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["min"] == 0 and doc["n"] == 5 and doc["k"] == 2


def test_measure_is_idempotent(tmp_path, capsys):
    path = tmp_path / "g.g6"
    write_graph(sample_gnp(20, 0.5, seed=3), path)
    runs = [run(["measure", "--in", str(path), "--p", "0.5", "--k", "4"], capsys) for _ in range(2)]
    assert runs[0][0] == 0 and runs[0][1] == runs[1][1]
    doc = json.loads(runs[0][1])
    assert doc["input"] == str(path)


def test_argument_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["construct", "--n", "100", "--p", "1/2"])  # --seed is required
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["measure", "--in", "x", "--p", "1.5"])
    assert info.value.code == 2


def test_precondition_exit_3(capsys):
    code, _, err = run(["construct", "--n", "100", "--p", "0.001", "--seed", "1"], capsys)
    assert code == 3
    assert json.loads(err)["error"] == "PreconditionError"
    code, _, err = run(["measure", "--in", "/nonexistent/g.g6", "--p", "0.5"], capsys)
    assert code == 3 and "error" in json.loads(err)


def test_construction_failure_exit_4(capsys):
    code, _, err = run(["construct", "--n", "60", "--p", "1/2", "--seed", "1", "--retries", "1"], capsys)
    assert code == 4
    assert json.loads(err)["error"] in {"RetriesExhausted", "ReservoirShortfall", "ConvergenceFailure"}


@pytest.mark.slow
def test_construct_writes_graph_and_report(tmp_path, capsys):
    g, rep = tmp_path / "out.g6", tmp_path / "rep.json"
    code, out, _ = run(["construct", "--n", "400", "--p", "1/2", "--seed", "2",
                        "--out", str(g), "--report", str(rep)], capsys)
    assert code == 0
    doc = json.loads(rep.read_text())
    assert doc == json.loads(out)
    assert doc["parameters"]["seed"] == 2 and doc["parameters"]["n"] == 400
    assert read_graph(g).num_edges == doc["edges"]


def test_schatten_command(capsys):
    code, out, _ = run(["schatten", "--n", "10", "--p", "0.3", "--s", "4", "--construction", "empty"], capsys)
    assert code == 0 and json.loads(out)["norm"] == pytest.approx(0.3)
    code, _, _ = run(["schatten", "--n", "10", "--p", "0.3", "--construction", "looprandom"], capsys)
    assert code == 3  # random constructions need an explicit seed
    code, out, _ = run(["schatten", "--n", "12", "--p", "1/2", "--bipartite", "2,2", "--construction",
                        "looprandom", "--seed", "1", "--compare"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["bipartite"] == [2, 2] and "constructions" in doc


def test_identities_command(capsys):
    code, out, _ = run(["identities", "--suites", "quadratic,stepup", "--count", "20"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["ok"] and len(doc["suites"]) == 2


def test_oracle_other_commands(capsys):
    code, out, _ = run(["oracle", "min-schatten", "--n", "3", "--p", "1/2"], capsys)
    assert code == 0 and json.loads(out)["s"] == 4
    code, out, _ = run(["oracle", "proportional", "--p", "1/2", "--n-max", "7"], capsys)
    assert code == 0 and json.loads(out)["count"] == 0


def _sweep_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_columns_golden(golden_dir):
    gold = json.loads((golden_dir / "sweep_columns.json").read_text())
    assert SWEEP_COLUMNS == gold["columns"]


def test_sweep_measure_grid(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QUASIRAND_THREADS", "1")
    out = tmp_path / "s.csv"
    code, _, _ = run(["sweep", "--n", "30,40,50", "--p", "1/2", "--k", "4", "--seeds", "3",
                      "--mode", "measure", "--out", str(out)], capsys)
    assert code == 0
    text = out.read_text()
    rows = _sweep_rows(text)
    assert len(rows) == 9 and list(rows[0]) == SWEEP_COLUMNS
    assert {r["seed"] for r in rows} == {"1", "2", "3"}
    assert all(r["status"] == "ok" for r in rows)
    assert not (tmp_path / "s.csv.tmp").exists()


def test_sweep_failures_are_recorded(capsys, monkeypatch):
    monkeypatch.setenv("QUASIRAND_THREADS", "2")
    code, out, _ = run(["sweep", "--n", "100", "--p", "0.001", "--seeds", "1,2"], capsys)
    rows = _sweep_rows(out)
    assert code == 0 and [r["status"] for r in rows] == ["PreconditionError"] * 2


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("QUASIRAND_THREADS", "2")
    assert _workers(10) == 2 and _workers(1) == 1
    monkeypatch.setenv("QUASIRAND_THREADS", "junk")
    assert _workers(1) == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "quasirand.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "quasirand" in proc.stdout
